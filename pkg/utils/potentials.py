"""
Catalog of one-dimensional potentials (natural units, hbar = m = 1)
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import ClassVar, Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import BadParams
from .validators import validate_potential_params

LEFT = 'left'
RIGHT = 'right'


@dataclass(frozen=True)
class DeltaMarker:
    """Distributional content gamma * delta(x - location)"""
    location: float
    strength: float


@dataclass(frozen=True)
class AsymptoticClass:
    side: str
    kind: str  # infinite | constant | periodic | undefined
    value: Optional[float] = None
    period: Optional[float] = None


class _Validated:
    variant: ClassVar[str] = ''

    def __post_init__(self):
        is_valid, errors = validate_potential_params(self.variant, self.params())
        if not is_valid:
            raise BadParams("; ".join(errors))

    def params(self) -> Dict:
        return asdict(self)

    @property
    def label(self) -> str:
        values = "_".join(f"{v:g}" if isinstance(v, float) else str(v)
                          for v in self.params().values() if v is not None)
        return f"{self.variant}_{values}" if values else self.variant


@dataclass(frozen=True)
class DoubleWell(_Validated):
    v0: float
    v1: float
    variant: ClassVar[str] = 'double_well'

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.select([x < 0, x < 1, x < 2], [0.0, -self.v0, -self.v1], 0.0)

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        return [b for b in (0.0, 1.0, 2.0) if lo <= b <= hi]


@dataclass(frozen=True)
class Cosine(_Validated):
    v0: float
    variant: ClassVar[str] = 'cosine'
    period: ClassVar[float] = math.pi

    def evaluate(self, x):
        return self.v0 * np.cos(2.0 * np.asarray(x, dtype=float))

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        return []


@dataclass(frozen=True)
class DiracComb(_Validated):
    a: float
    gamma: float
    variant: ClassVar[str] = 'dirac_comb'

    @property
    def period(self) -> float:
        return self.a

    def evaluate(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def delta_markers(self, lo: float, hi: float) -> List[DeltaMarker]:
        first, last = math.ceil(lo / self.a), math.floor(hi / self.a)
        return [DeltaMarker(n * self.a, self.gamma) for n in range(first, last + 1)]

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        return [m.location for m in self.delta_markers(lo, hi)]


@dataclass(frozen=True)
class KronigPenney(_Validated):
    """Barrier V0 on (-b, 0) and well V1 on (0, 1), repeated with period b + 1"""
    b: float
    v0: float
    v1: float
    variant: ClassVar[str] = 'kronig_penney'

    @property
    def period(self) -> float:
        return self.b + 1.0

    def evaluate(self, x):
        u = np.mod(np.asarray(x, dtype=float) + self.b, self.period)
        return np.where(u < self.b, self.v0, self.v1)

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        points = []
        first = math.floor((lo + self.b) / self.period) - 1
        last = math.ceil((hi + self.b) / self.period) + 1
        for n in range(first, last + 1):
            for b in (n * self.period - self.b, n * self.period):
                if lo <= b <= hi:
                    points.append(b)
        return sorted(points)


@dataclass(frozen=True)
class Step(_Validated):
    v0: float
    variant: ClassVar[str] = 'step'

    def evaluate(self, x):
        return np.where(np.asarray(x, dtype=float) < 0, 0.0, self.v0)

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        return [0.0] if lo <= 0.0 <= hi else []


@dataclass(frozen=True)
class OpenBox(_Validated):
    """Hard wall at x = 0, well of depth V0 on (0, 1), free for x > 1.

    With ramp = 'linear' the well floor rises linearly from -V0 at x = 2/3 to
    0 at x = 1.
    """
    v0: float
    ramp: str = 'none'
    variant: ClassVar[str] = 'open_box'
    ramp_start: ClassVar[float] = 2.0 / 3.0

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.full_like(x, -self.v0)
        if self.ramp == 'linear':
            rising = x > self.ramp_start
            inside = np.where(rising, -self.v0 + 3.0 * self.v0 * (x - self.ramp_start), inside)
        return np.where(x < 0, np.inf, np.where(x < 1, inside, 0.0))

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        points = (0.0, self.ramp_start, 1.0) if self.ramp == 'linear' else (0.0, 1.0)
        return [b for b in points if lo <= b <= hi]


@dataclass(frozen=True)
class OneSidedComb(_Validated):
    """Hard wall at x = -b followed by deltas at x = n*a, n >= 0"""
    a: float
    gamma: float
    b: float
    variant: ClassVar[str] = 'one_sided_comb'

    @property
    def period(self) -> float:
        return self.a

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < -self.b, np.inf, 0.0)

    def delta_markers(self, lo: float, hi: float) -> List[DeltaMarker]:
        first, last = max(0, math.ceil(lo / self.a)), math.floor(hi / self.a)
        return [DeltaMarker(n * self.a, self.gamma) for n in range(first, last + 1)]

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        points = [-self.b] if lo <= -self.b <= hi else []
        return points + [m.location for m in self.delta_markers(lo, hi)]


@dataclass(frozen=True)
class HardBox(_Validated):
    """Infinite walls at tau and tau + sigma; inner profile v_left | v_right split at `split`"""
    tau: float
    sigma: float
    v_left: float = 0.0
    v_right: float = 0.0
    split: Optional[float] = None
    variant: ClassVar[str] = 'hard_box'

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        split = self.tau + self.sigma if self.split is None else self.split
        inner = np.where(x < split, self.v_left, self.v_right)
        outside = (x < self.tau) | (x > self.tau + self.sigma)
        return np.where(outside, np.inf, inner)

    def breakpoints(self, lo: float, hi: float) -> List[float]:
        points = [self.tau, self.tau + self.sigma]
        if self.split is not None:
            points.insert(1, self.split)
        return [b for b in points if lo <= b <= hi]


Potential = Union[DoubleWell, Cosine, DiracComb, KronigPenney, Step, OpenBox, OneSidedComb, HardBox]

VARIANTS = {cls.variant: cls for cls in
            (DoubleWell, Cosine, DiracComb, KronigPenney, Step, OpenBox, OneSidedComb, HardBox)}

PERIODIC_VARIANTS = ('cosine', 'dirac_comb', 'kronig_penney')


def create_potential(variant: str, params: Dict) -> Potential:
    """Factory used by the config layer: variant name plus named parameters"""
    is_valid, errors = validate_potential_params(variant, params)
    if not is_valid:
        raise BadParams("; ".join(errors))
    return VARIANTS[variant](**params)


def evaluate(p: Potential, x):
    """Regular part of V(x); +inf inside hard walls. Scalars in, scalars out."""
    value = p.evaluate(x)
    return float(value) if np.ndim(value) == 0 else value


def delta_markers(p: Potential, lo: float, hi: float) -> List[DeltaMarker]:
    """Distributional content of the potential on [lo, hi]"""
    if hasattr(p, 'delta_markers'):
        return p.delta_markers(lo, hi)
    return []


def breakpoints(p: Potential, lo: float, hi: float) -> List[float]:
    return p.breakpoints(lo, hi)


def is_periodic(p: Potential) -> bool:
    return p.variant in PERIODIC_VARIANTS


def classify(p: Potential, side: str) -> AsymptoticClass:
    """Asymptotic behaviour of the potential on one side"""
    if side not in (LEFT, RIGHT):
        raise BadParams(f"side must be 'left' or 'right', got {side!r}")

    if isinstance(p, DoubleWell):
        return AsymptoticClass(side, 'constant', value=0.0)
    if isinstance(p, Step):
        return AsymptoticClass(side, 'constant', value=0.0 if side == LEFT else p.v0)
    if isinstance(p, (Cosine, DiracComb, KronigPenney)):
        return AsymptoticClass(side, 'periodic', period=p.period)
    if isinstance(p, OpenBox):
        return AsymptoticClass(side, 'infinite') if side == LEFT else AsymptoticClass(side, 'constant', value=0.0)
    if isinstance(p, OneSidedComb):
        return AsymptoticClass(side, 'infinite') if side == LEFT else AsymptoticClass(side, 'periodic', period=p.a)
    if isinstance(p, HardBox):
        return AsymptoticClass(side, 'infinite')
    return AsymptoticClass(side, 'undefined')


def potential_range(p: Potential) -> Tuple[float, float]:
    """Minimum and maximum of the finite regular part"""
    if isinstance(p, DoubleWell):
        return -p.v0, 0.0
    if isinstance(p, Cosine):
        return -p.v0, p.v0
    if isinstance(p, (DiracComb, OneSidedComb)):
        return 0.0, 0.0
    if isinstance(p, KronigPenney):
        return p.v1, p.v0
    if isinstance(p, Step):
        return 0.0, p.v0
    if isinstance(p, OpenBox):
        return -p.v0, 0.0
    return min(p.v_left, p.v_right), max(p.v_left, p.v_right)
