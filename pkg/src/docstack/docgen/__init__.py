from .corpus import (
    SPLITS,
    CorpusConfig,
    CorpusError,
    LabeledImage,
    ManifestRow,
    class_names,
    generate_corpus,
    generate_pretext_corpus,
    load_images,
    plan_corpus,
    read_manifest,
    render_image,
    validate_corpus,
)
from .grammars import DOCUMENT_GRAMMARS, PRETEXT_GRAMMARS, Block, LayoutGrammar

__all__ = [
    "SPLITS", "CorpusConfig", "CorpusError", "LabeledImage", "ManifestRow", "class_names",
    "generate_corpus", "generate_pretext_corpus", "load_images", "plan_corpus", "read_manifest",
    "render_image", "validate_corpus", "DOCUMENT_GRAMMARS", "PRETEXT_GRAMMARS", "Block",
    "LayoutGrammar",
]
