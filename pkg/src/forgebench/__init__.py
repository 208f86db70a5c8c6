"""forgebench: robustness benchmarking of deepfake detectors.

Applies a fixed set of video processing operations to full copies of a
test set, scores every copy through a pluggable detector interface, and
reports per-operation ROC-AUC grouped by operation category.
"""

__version__ = "0.1.0"

PROTOCOL_NAME = "forgebench/1"
