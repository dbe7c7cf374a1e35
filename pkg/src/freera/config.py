"""Numerical tolerances shared by every module.

Defaults can be overridden through environment variables
(``FREERA_RANK_TOL``, ``FREERA_RESIDUAL_TOL``, ``FREERA_SDP_MAX_ITER``,
``FREERA_INDETERMINATE_TOL``) or temporarily with :func:`using`.
"""

from __future__ import annotations

import contextlib
import dataclasses
import os
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-12  # absolute threshold for pruning polynomial terms
    elimination: float = 1e-10  # relative threshold during reduction steps
    rank: float = 1e-8  # relative rank threshold for nullspaces and spans
    residual: float = 1e-6  # acceptance threshold for certificates and witnesses
    indeterminate: float = 1e-6  # SDP margin below which no verdict is given
    sdp_max_iter: int = 500

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"tolerance {f.name} must be positive")


_ENV = {
    "rank": ("FREERA_RANK_TOL", float),
    "residual": ("FREERA_RESIDUAL_TOL", float),
    "indeterminate": ("FREERA_INDETERMINATE_TOL", float),
    "sdp_max_iter": ("FREERA_SDP_MAX_ITER", int),
}


def from_env(environ: dict[str, str] | None = None) -> Tolerances:
    environ = os.environ if environ is None else environ
    kw = {}
    for field, (var, cast) in _ENV.items():
        if var in environ:
            kw[field] = cast(environ[var])
    return Tolerances(**kw)


_current = from_env()


def get() -> Tolerances:
    return _current


@contextlib.contextmanager
def using(**overrides) -> Iterator[Tolerances]:
    """Temporarily replace some tolerances."""
    global _current
    saved = _current
    _current = dataclasses.replace(saved, **overrides)
    try:
        yield _current
    finally:
        _current = saved
