"""Post-hoc explanations: squared-gradient sensitivity and ε-LRP."""

from .net import FeedForwardNet, Layer, NumericError
from .relevance import (RelevanceMap, SingularDenominatorError, gradient,
                        lrp, sensitivity)
from .heatmap import render_heatmap

__all__ = [
    "FeedForwardNet", "Layer", "NumericError", "RelevanceMap",
    "SingularDenominatorError", "gradient", "lrp", "sensitivity",
    "render_heatmap",
]
