"""Frozen builtin scenario documents (vertex lists derived by derive_builtin_vertices.py)."""
