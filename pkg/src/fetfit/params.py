"""Compact-model parameter set and its sampling ranges.

The surrogate device model is controlled by 14 named parameters. Their
canonical order (``PARAM_NAMES``) fixes the column layout of dataset files,
the regression-target vector, and every serialized parameter document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, InvalidParameterError

# Canonical parameter order. Everything that maps parameters to/from flat
# vectors (datasets, the network head, normalizers) uses this order.
PARAM_NAMES = (
    "PHIG", "ETA0", "CIT", "CDSC", "U0", "UA", "VSATV",
    "LAMBDA", "RDSW", "IOFF0", "CGGMAX", "CGGMIN", "DVTCV", "ACV",
)

# Parameters drawn log-uniformly instead of uniformly.
LOG_UNIFORM_PARAMS = frozenset({"IOFF0"})

# Minimum separation between the C-V plateau levels, fF.
CGG_MARGIN_FF = 0.1


@dataclass(frozen=True)
class ModelParams:
    """The 14 surrogate compact-model parameters.

    PHIG    gate work function, eV
    ETA0    DIBL coefficient, V/V
    CIT     interface-trap ideality contribution, dimensionless
    CDSC    drain-coupled ideality contribution, dimensionless
    U0      mobility prefactor, dimensionless multiplier
    UA      vertical-field mobility degradation, 1/V
    VSATV   saturation-voltage scale, V
    LAMBDA  channel-length modulation, 1/V
    RDSW    series-resistance degeneration, 1/A
    IOFF0   leakage floor, A
    CGGMAX  maximum gate capacitance, fF
    CGGMIN  minimum gate capacitance, fF
    DVTCV   C-V threshold offset from the I-V threshold, V
    ACV     C-V transition width, V
    """

    PHIG: float
    ETA0: float
    CIT: float
    CDSC: float
    U0: float
    UA: float
    VSATV: float
    LAMBDA: float
    RDSW: float
    IOFF0: float
    CGGMAX: float
    CGGMIN: float
    DVTCV: float
    ACV: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParameterError(f"{f.name} must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        if self.IOFF0 <= 0:
            raise InvalidParameterError(f"IOFF0 must be > 0, got {self.IOFF0}")
        if self.ACV <= 0:
            raise InvalidParameterError(f"ACV must be > 0, got {self.ACV}")
        if self.VSATV <= 0:
            raise InvalidParameterError(f"VSATV must be > 0, got {self.VSATV}")
        if self.CGGMIN + CGG_MARGIN_FF > self.CGGMAX:
            raise InvalidParameterError(
                f"CGGMIN + {CGG_MARGIN_FF} must not exceed CGGMAX "
                f"(got CGGMIN={self.CGGMIN}, CGGMAX={self.CGGMAX})"
            )

    def to_vector(self) -> np.ndarray:
        """Flatten to a length-14 array in canonical order."""
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    @classmethod
    def from_vector(cls, vec) -> "ModelParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(PARAM_NAMES),):
            raise InvalidParameterError(f"expected {len(PARAM_NAMES)} values, got shape {vec.shape}")
        return cls(**{n: float(v) for n, v in zip(PARAM_NAMES, vec)})

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        missing = [n for n in PARAM_NAMES if n not in d]
        if missing:
            raise InvalidParameterError(f"missing parameters: {missing}")
        extra = [k for k in d if k not in PARAM_NAMES]
        if extra:
            raise InvalidParameterError(f"unknown parameters: {extra}")
        return cls(**{n: float(d[n]) for n in PARAM_NAMES})

    def replace(self, **changes) -> "ModelParams":
        d = self.to_dict()
        d.update(changes)
        return ModelParams.from_dict(d)


#: Canonical mid-range device used by demos, docs, and regression tests.
REFERENCE_PARAMS = ModelParams(
    PHIG=4.45, ETA0=0.10, CIT=0.10, CDSC=0.05, U0=1.0, UA=0.8, VSATV=0.4,
    LAMBDA=0.1, RDSW=500.0, IOFF0=1e-9, CGGMAX=1.0, CGGMIN=0.2, DVTCV=0.0,
    ACV=0.10,
)


@dataclass(frozen=True)
class ParamRanges:
    """Per-parameter (lo, hi) sampling bounds.

    All parameters are drawn uniformly except those in ``LOG_UNIFORM_PARAMS``
    (log-uniform). ``lo == hi`` is allowed and yields a constant; dataset
    generation and normalizer fitting additionally require ``lo < hi``.
    """

    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [n for n in PARAM_NAMES if n not in self.bounds]
        if missing:
            raise ConfigError(f"ranges missing parameters: {missing}")
        extra = [k for k in self.bounds if k not in PARAM_NAMES]
        if extra:
            raise ConfigError(f"ranges contain unknown parameters: {extra}")
        for name, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigError(f"{name} bounds must be finite, got ({lo}, {hi})")
            if lo > hi:
                raise ConfigError(f"{name} bounds inverted: ({lo}, {hi})")
            if name in LOG_UNIFORM_PARAMS and lo <= 0:
                raise ConfigError(f"{name} is log-uniform and needs lo > 0, got {lo}")

    def lo_vector(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in PARAM_NAMES], dtype=float)

    def hi_vector(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in PARAM_NAMES], dtype=float)

    def require_nondegenerate(self):
        """Raise unless lo < hi for every parameter."""
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise ConfigError(f"{name} range is degenerate: ({lo}, {hi})")

    def contains(self, params: ModelParams) -> bool:
        return all(
            self.bounds[n][0] <= getattr(params, n) <= self.bounds[n][1]
            for n in PARAM_NAMES
        )

    def clip_vector(self, vec) -> np.ndarray:
        """Clip a flat parameter vector into the box, then restore the C-V
        plateau margin by lowering CGGMIN if needed."""
        vec = np.clip(np.asarray(vec, dtype=float), self.lo_vector(), self.hi_vector())
        i_max = PARAM_NAMES.index("CGGMAX")
        i_min = PARAM_NAMES.index("CGGMIN")
        if vec[i_min] + CGG_MARGIN_FF > vec[i_max]:
            vec[i_min] = vec[i_max] - CGG_MARGIN_FF
        return vec

    def clip(self, params: ModelParams) -> ModelParams:
        return ModelParams.from_vector(self.clip_vector(params.to_vector()))

    def to_dict(self) -> dict:
        return {n: list(self.bounds[n]) for n in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "ParamRanges":
        return cls(bounds={k: (float(v[0]), float(v[1])) for k, v in d.items()})


#: Default Monte Carlo sampling ranges. Chosen so that every in-range draw
#: produces curves from which all 24 features extract cleanly.
DEFAULT_RANGES = ParamRanges(bounds={
    "PHIG": (4.30, 4.60),
    "ETA0": (0.05, 0.15),
    "CIT": (0.00, 0.30),
    "CDSC": (0.00, 0.20),
    "U0": (0.5, 1.5),
    "UA": (0.3, 1.5),
    "VSATV": (0.2, 0.6),
    "LAMBDA": (0.0, 0.3),
    "RDSW": (0.0, 2000.0),
    "IOFF0": (1e-10, 1e-8),
    "CGGMAX": (0.6, 1.5),
    "CGGMIN": (0.05, 0.45),
    "DVTCV": (-0.10, 0.10),
    "ACV": (0.05, 0.15),
})
