"""One-shot exporter: read a title corpus, embed the normalized titles,
write the DFV1 vector file the scoring toolkit consumes.

This package deliberately does not import the main toolkit; it speaks to
it only through the corpus file schema and the DFV1 format. Normalization
is re-implemented here and pinned to the shared cross-language test
vectors in testdata/normalization_vectors.json.
"""

from .exporter import ExportError, ExportManifest, export_embeddings
from .normalize import normalize_title

__all__ = ["ExportError", "ExportManifest", "export_embeddings", "normalize_title"]
