"""Exponent ranges for weighted radial embeddings, with numerical companions."""
