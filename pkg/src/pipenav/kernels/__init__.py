"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy reference
implementation is the fallback. PIPENAV_BACKEND=python|native forces a
choice (forcing native raises if the extension is missing, rather than
silently running the slow path).
"""

from __future__ import annotations

import os

from . import pyref

try:
    from . import _native as native
except ImportError:  # pragma: no cover - depends on whether the ext built
    native = None

_requested = os.environ.get("PIPENAV_BACKEND", "").strip().lower()
if _requested == "python":
    active = pyref
elif _requested == "native":
    if native is None:
        raise ImportError(
            "PIPENAV_BACKEND=native but the compiled extension is not installed"
        )
    active = native
elif _requested == "":
    active = native if native is not None else pyref
else:
    raise ValueError(f"unknown PIPENAV_BACKEND {_requested!r}")


def backend_name() -> str:
    return active.NAME


rk4_advance = active.rk4_advance
shift_clamp = active.shift_clamp
ranges_to_next_feature = active.ranges_to_next_feature
sonar_likelihood = active.sonar_likelihood
weights_mul_norm = active.weights_mul_norm
systematic_indices = active.systematic_indices
occupied_bins = active.occupied_bins
