"""Reference adapter for the forgebench scorer stdio protocol.

Wraps an arbitrary per-frame scoring callable (a real detector would go
here) behind protocol v1, so the harness can drive it as a subprocess.
"""

__version__ = "0.1.0"
