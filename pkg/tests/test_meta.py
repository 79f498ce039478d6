import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docstack import meta
from docstack.meta.base import NotFittedError, one_hot, vote
from docstack.meta.elm import RIDGE
from docstack.meta.linear import Ridge, solve_normal_equations
from docstack.meta.svm import SVM, kkt_violation, rbf_kernel, smo
from oracles import knn_brute, simplex_rows

C = 4


def meta_data(n=120, seed=0, noise_blocks=5):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % C
    rng.shuffle(y)
    X = np.concatenate([simplex_rows(rng, n, C, 2.0, y) for _ in range(noise_blocks)], axis=1)
    return X, y


# -- kNN -----------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 5, 32])
def test_knn_equals_brute_force(k):
    X, y = meta_data(80, 1)
    Xt, _ = meta_data(40, 2)
    Xt[:5] = X[:5]  # exact duplicates exercise distance ties
    clf = meta.make("knn", k=k).fit(X, y, C)
    assert np.array_equal(clf.predict(Xt), knn_brute(X, y, Xt, k, C))


def test_knn_k_larger_than_training_set():
    X, y = meta_data(10)
    with pytest.raises(ValueError):
        meta.make("knn", k=11).fit(X, y, C)


# -- linear --------------------------------------------------------------------

def test_ridge_zero_equals_pseudo_inverse():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(100, 12))
    y = rng.integers(0, C, 100)
    clf = Ridge(lam=0.0).fit(X, y, C)
    A = np.hstack([X, np.ones((100, 1))])
    W = np.linalg.pinv(A) @ one_hot(y, C)
    assert np.max(np.abs(clf.W - W)) <= 1e-8


def test_ridge_matches_hand_normal_equations_and_shrinks():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(60, 5))
    Y = one_hot(rng.integers(0, C, 60), C)
    A = np.hstack([X, np.ones((60, 1))])
    P = np.eye(6)
    P[-1, -1] = 0.0
    ref = np.linalg.solve(A.T @ A + 2.5 * P, A.T @ Y)
    assert np.allclose(solve_normal_equations(X, Y, 2.5, penalize_bias=False), ref, atol=1e-12)
    norms = [np.linalg.norm(solve_normal_equations(X, Y, lam, False)[:-1]) for lam in (0.1, 1, 10, 100)]
    assert norms == sorted(norms, reverse=True)
    with pytest.raises(ValueError):
        Ridge(lam=-1.0)


def test_linreg_handles_collinear_probability_blocks():
    X, y = meta_data()
    clf = meta.make("linreg").fit(X, y, C)
    assert np.all(np.isfinite(clf.W))
    assert (clf.predict(X) == y).mean() > 0.9


# -- ELM -----------------------------------------------------------------------

@pytest.mark.parametrize("n,d", [(250, 40), (500, 40), (120, 20)])
def test_elm_normal_equations_orthogonality(n, d):
    rng = np.random.default_rng(n + d)
    X = rng.random((n, d))
    y = rng.integers(0, 8, n)
    clf = meta.make("elm", hidden_units=100, seed=1).fit(X, y, 8)
    H = clf.hidden(X)
    residual = one_hot(y, 8) - H @ clf.beta
    # Stationarity of the stabilised least-squares problem: H'(T - H beta) = lambda beta.
    assert np.max(np.abs(H.T @ residual - RIDGE * clf.beta)) <= 1e-6


def test_elm_is_seeded():
    X, y = meta_data()
    a = meta.make("elm", seed=3).fit(X, y, C)
    b = meta.make("elm", seed=3).fit(X, y, C)
    c = meta.make("elm", seed=4).fit(X, y, C)
    assert np.array_equal(a.beta, b.beta) and not np.array_equal(a.W_in, c.W_in)


# -- SVM -----------------------------------------------------------------------

def test_svm_kkt_conditions():
    X, y = meta_data(150, 5)
    clf = SVM(C=1.0).fit(X, y, C)
    assert clf.kkt_violations().max() <= 1e-3


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
@settings(max_examples=15, deadline=None)
def test_smo_binary_kkt_property(seed, c_reg):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=40) > 0, 1.0, -1.0)
    if np.all(y == y[0]):
        y[0] = -y[0]
    K = rbf_kernel(X, X, 0.5)
    alpha, rho, _ = smo(K, y, c_reg)
    assert np.all(alpha >= -1e-12) and np.all(alpha <= c_reg + 1e-12)
    assert abs(alpha @ y) < 1e-8
    assert kkt_violation(alpha, y, K @ (alpha * y) - rho, c_reg) <= 1e-3


def test_svm_duplicate_points_leave_separable_decision_unchanged():
    rng = np.random.default_rng(6)
    X = np.vstack([rng.normal(-3, 0.5, (20, 2)), rng.normal(3, 0.5, (20, 2))])
    y = np.repeat([0, 1], 20)
    grid = rng.normal(0, 3, (50, 2))
    a = SVM(C=1e4, gamma=0.1).fit(X, y, 2).predict(grid)
    b = SVM(C=1e4, gamma=0.1).fit(np.vstack([X, X]), np.concatenate([y, y]), 2).predict(grid)
    assert np.array_equal(a, b)


def test_svm_one_sided_subproblem_is_flagged():
    X, y = meta_data(40)
    y = np.where(y == 3, 0, y)  # class 3 never occurs
    clf = SVM().fit(X, y, C)
    assert any("class 3" in line for line in clf.report)
    assert np.all(clf.predict(X) != 3)


# -- bagging -------------------------------------------------------------------

def test_bagging_with_one_full_bag_equals_base_svm():
    X, y = meta_data(100, 7)
    Xt, _ = meta_data(50, 8)
    bag = meta.make("bagging_svm", n_bags=1, bag_size=len(X), bootstrap=False).fit(X, y, C)
    base = SVM().fit(X, y, C)
    assert np.array_equal(bag.predict(Xt), base.predict(Xt))


def test_bagging_bags_are_seeded_bootstrap_samples():
    clf = meta.make("bagging_svm", n_bags=3, bag_size=50, seed=2)
    i0, i1 = clf.bag_indices(100, 0), clf.bag_indices(100, 1)
    assert len(i0) == 50 and not np.array_equal(i0, i1)
    assert np.array_equal(i0, meta.make("bagging_svm", seed=2, bag_size=50).bag_indices(100, 0))


def test_vote_ties_go_to_smallest_label():
    labels = np.array([[2, 1, 1, 2], [0, 3, 3, 3]])
    assert vote(labels, 4).tolist() == [1, 3]


# -- MLNN ----------------------------------------------------------------------

def test_mlnn_learns_and_is_deterministic():
    X, y = meta_data(160, 9)
    a = meta.make("mlnn", epochs=30, seed=5).fit(X, y, C)
    b = meta.make("mlnn", epochs=30, seed=5).fit(X, y, C)
    assert np.array_equal(a.predict(X), b.predict(X))
    assert (a.predict(X) == y).mean() > 0.9


def test_mlnn_label_permutation_is_approximately_equivariant():
    X, y = meta_data(200, 10)
    Xt, yt = meta_data(100, 11)
    perm = np.array([2, 0, 3, 1])
    Xp = X.reshape(len(X), 5, C)[:, :, np.argsort(perm)].reshape(len(X), -1)
    Xtp = Xt.reshape(len(Xt), 5, C)[:, :, np.argsort(perm)].reshape(len(Xt), -1)
    base = meta.make("mlnn", epochs=40, seed=1).fit(X, y, C).predict(Xt)
    permuted = meta.make("mlnn", epochs=40, seed=1).fit(Xp, perm[y], C).predict(Xtp)
    assert (perm[base] == permuted).mean() >= 0.9


# -- common surface ------------------------------------------------------------

PARAMS = {"knn": {"k": 5}, "bagging_svm": {"n_bags": 3, "bag_size": 60}, "mlnn": {"epochs": 20}}


@pytest.mark.parametrize("kind", meta.KINDS)
def test_save_load_roundtrip_and_not_fitted(kind, tmp_path):
    X, y = meta_data(80, 12)
    clf = meta.make(kind, **PARAMS.get(kind, {}))
    with pytest.raises(NotFittedError):
        clf.predict(X)
    clf.fit(X, y, C)
    clf.save(tmp_path / "m.bin")
    back = meta.load(tmp_path / "m.bin", kind)
    assert np.array_equal(back.predict(X), clf.predict(X))


@pytest.mark.parametrize("kind", meta.KINDS)
def test_perfect_block_gives_perfect_accuracy(kind):
    rng = np.random.default_rng(13)
    n = 200
    y = np.arange(n) % C
    noise = [simplex_rows(rng, n, C) for _ in range(4)]
    X = np.concatenate([one_hot(y, C)] + noise, axis=1)
    yt = rng.integers(0, C, 100)
    Xt = np.concatenate([one_hot(yt, C)] + [simplex_rows(rng, 100, C) for _ in range(4)], axis=1)
    clf = meta.make(kind, **PARAMS.get(kind, {})).fit(X, y, C)
    assert (clf.predict(Xt) == yt).mean() == 1.0


def test_unknown_kind():
    with pytest.raises(ValueError, match="unknown"):
        meta.make("forest")
