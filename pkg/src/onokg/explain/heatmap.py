"""Token heatmaps for relevance scores (terminal ANSI or inline HTML).

Scores are normalized so the largest magnitude maps to full intensity;
raw scores ride along machine-readably (a trailing comment line in
terminal mode, data attributes plus an HTML comment in HTML mode).
"""

from __future__ import annotations

import html as _html
import json

import numpy as np

# background colors from faint to strong (256-color ANSI)
_BUCKETS = (255, 224, 217, 210, 203, 196)


def _normalize(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    peak = np.abs(scores).max() if len(scores) else 0.0
    if peak == 0.0:
        return np.zeros(len(scores))
    return np.abs(scores) / peak


def render_heatmap(tokens, scores, fmt: str = "terminal") -> str:
    if len(tokens) != len(scores):
        raise ValueError(f"{len(tokens)} tokens but {len(scores)} scores")
    if fmt not in ("terminal", "html"):
        raise ValueError(f"unknown heatmap format {fmt!r}")
    norm = _normalize(scores)
    raw = [float(s) for s in scores]
    if fmt == "terminal":
        parts = []
        for token, weight in zip(tokens, norm):
            bucket = _BUCKETS[min(int(weight * (len(_BUCKETS) - 1) + 1e-9),
                                  len(_BUCKETS) - 1)]
            parts.append(f"\x1b[48;5;{bucket}m\x1b[30m{token}\x1b[0m")
        line = " ".join(parts)
        return f"{line}\n# scores: {json.dumps(raw)}\n"
    spans = []
    for token, weight, score in zip(tokens, norm, raw):
        spans.append(
            f'<span style="background-color: rgba(255,64,32,{weight:.3f})" '
            f'data-score="{score!r}">{_html.escape(str(token))}</span>')
    body = " ".join(spans)
    return ("<!DOCTYPE html>\n<html><body><p>"
            f"{body}"
            "</p></body></html>\n"
            f"<!-- scores: {json.dumps(raw)} -->\n")
