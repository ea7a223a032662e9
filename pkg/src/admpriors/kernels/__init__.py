"""Kernel backend selection.

The hot inner loops (divergence-form stencils, SOR sweeps, SDE stepping)
exist twice: a Cython extension (``_core``) and a NumPy/Python reference
(``_ref``).  The compiled backend is used when importable; set
``ADMPRIORS_KERNELS=python`` or ``=compiled`` to force a choice.
Both produce bit-identical results (see tests/test_kernels.py).
"""
from __future__ import annotations

import os

from . import _ref

_core = None
_forced = os.environ.get("ADMPRIORS_KERNELS", "").strip().lower()
if _forced not in ("", "python", "compiled"):
    raise ValueError(f"ADMPRIORS_KERNELS must be 'python' or 'compiled', got {_forced!r}")
if _forced != "python":
    try:
        from . import _core  # type: ignore[no-redef]
    except ImportError:
        if _forced == "compiled":
            raise
        _core = None

BACKEND = "compiled" if _core is not None else "python"


def _pick(name):
    if _core is not None and hasattr(_core, name):
        return getattr(_core, name)
    return getattr(_ref, name)


div_form_apply_1d = _pick("div_form_apply_1d")
div_form_apply_2d = _pick("div_form_apply_2d")
div_form_apply_3d = _pick("div_form_apply_3d")  # reference only
corner_term_2d = _pick("corner_term_2d")
sor_color_sweep_1d = _pick("sor_color_sweep_1d")
sor_color_sweep_2d = _pick("sor_color_sweep_2d")
sde_path_block = _pick("sde_path_block")
