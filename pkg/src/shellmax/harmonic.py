"""Finite-support functions, convolution, radial averages, operator norms.

Exact identities (convolution algebra, sphere-average two-path agreement)
run in rational arithmetic whenever the inputs are rational; the Python
numeric tower makes that automatic.  Operator-norm estimation compresses
right-convolution to the enumerated ball and runs double-precision power
iteration on T*T, reporting an honest lower bound for the l2(Gamma) norm
together with its truncation radius and convergence data; no extrapolation
to R = infinity is ever performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy import sparse

from .cayley import LayeredBall
from .errors import InvariantBreachError
from .groups import GroupModel


class FiniteFunction:
    """Sparse real-valued function of finite support on a group.

    Values may be ints, Fractions, or floats; zeros are dropped.  Instances
    are immutable values with lazily cached l1/l2/linf norms.
    """

    __slots__ = ("_data", "_l1", "_l2sq", "_linf")

    def __init__(self, data):
        self._data = {x: v for x, v in dict(data).items() if v != 0}
        self._l1 = self._l2sq = self._linf = None

    @staticmethod
    def delta(x, value=1) -> "FiniteFunction":
        return FiniteFunction({x: value})

    @staticmethod
    def indicator(elements: Iterable, value=1) -> "FiniteFunction":
        return FiniteFunction({x: value for x in elements})

    def items(self):
        return self._data.items()

    def support(self):
        return self._data.keys()

    def __getitem__(self, x):
        return self._data.get(x, 0)

    def __len__(self):
        return len(self._data)

    def __eq__(self, other):
        return isinstance(other, FiniteFunction) and self._data == other._data

    def __hash__(self):
        return hash(frozenset(self._data.items()))

    def l1(self):
        if self._l1 is None:
            self._l1 = sum(abs(v) for v in self._data.values())
        return self._l1

    def l2_squared(self):
        if self._l2sq is None:
            self._l2sq = sum(v * v for v in self._data.values())
        return self._l2sq

    def l2(self) -> float:
        return math.sqrt(self.l2_squared())

    def linf(self):
        if self._linf is None:
            self._linf = max((abs(v) for v in self._data.values()), default=0)
        return self._linf

    def lp(self, p) -> float:
        if p == math.inf:
            return float(self.linf())
        return float(sum(abs(v) ** p for v in self._data.values())) ** (1.0 / p)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._data.values())

    def scale(self, c) -> "FiniteFunction":
        return FiniteFunction({x: c * v for x, v in self._data.items()})

    def __add__(self, other: "FiniteFunction") -> "FiniteFunction":
        data = dict(self._data)
        for x, v in other._data.items():
            data[x] = data.get(x, 0) + v
        return FiniteFunction(data)

    def abs(self) -> "FiniteFunction":
        return FiniteFunction({x: abs(v) for x, v in self._data.items()})

    def translate_left(self, model: GroupModel, w) -> "FiniteFunction":
        """Left translation: (lambda_w f)(x) = f(w^-1 x)."""
        return FiniteFunction({model.multiply(w, x): v for x, v in self._data.items()})

    def __repr__(self):
        return f"FiniteFunction({len(self._data)} points, l1={self.l1()})"


def convolve(model: GroupModel, f: FiniteFunction, h: FiniteFunction) -> FiniteFunction:
    """(f * h)(w) = sum over uv = w of f(u) h(v)."""
    multiply = model.multiply
    out: dict = {}
    for u, fu in f.items():
        for v, hv in h.items():
            w = multiply(u, v)
            out[w] = out.get(w, 0) + fu * hv
    return FiniteFunction(out)


@dataclass(frozen=True)
class RadialMeasure:
    """Normalized indicator of a sphere, shell, or ball: nonnegative, total
    mass 1, invariant under inversion."""
    kind: str          # 'sphere' | 'shell' | 'ball'
    radius: int
    width: int
    fn: FiniteFunction

    def is_symmetric(self, model: GroupModel) -> bool:
        return all(self.fn[model.invert(x)] == v for x, v in self.fn.items())


def sphere_measure(ball: LayeredBall, r: int) -> RadialMeasure:
    layer = ball.sphere(r)
    if not layer:
        raise ValueError(f"sphere of radius {r} is empty")
    w = Fraction(1, len(layer))
    return RadialMeasure("sphere", r, 1, FiniteFunction({x: w for x in layer}))


def shell_measure(ball: LayeredBall, r: int, width: int = 1) -> RadialMeasure:
    """Shell SS_r of integer width: radii r <= |x| < r + width.  With width
    1 this is the sphere; all supported metrics are integer-valued."""
    elements = [x for n in range(r, min(r + width, ball.radius + 1)) for x in ball.sphere(n)]
    if not elements:
        raise ValueError(f"shell [{r}, {r + width}) is empty")
    w = Fraction(1, len(elements))
    return RadialMeasure("shell", r, width, FiniteFunction({x: w for x in elements}))


def ball_measure(ball: LayeredBall, n: int) -> RadialMeasure:
    size = ball.ball_size(n)
    w = Fraction(1, size)
    return RadialMeasure("ball", n, n + 1,
                         FiniteFunction({x: w for x in ball.elements(up_to=n)}))


def sphere_average(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                   r: int) -> FiniteFunction:
    """Average of f over spheres of radius r: the right-convolution f * sigma_r.

    Computed twice -- via ``convolve`` and by direct neighbor summation --
    and the two results must agree exactly; a mismatch is an internal
    invariant breach, never a property of the input.
    """
    measure = sphere_measure(ball, r)
    via_convolution = convolve(model, f, measure.fn)
    layer = ball.sphere(r)
    weight = Fraction(1, len(layer))
    direct: dict = {}
    multiply, invert = model.multiply, model.invert
    for u, fu in f.items():
        mass = fu * weight
        for s in layer:
            w = multiply(u, invert(s))
            direct[w] = direct.get(w, 0) + mass
    if FiniteFunction(direct) != via_convolution:
        raise InvariantBreachError(
            f"sphere_average paths disagree for r={r} on {model.spec()!r}")
    return via_convolution


@dataclass(frozen=True)
class NormEstimate:
    """Truncated operator-norm measurement with full convergence provenance."""
    norm: float
    converged: bool
    iters: int
    last_rel_change: float
    truncation_radius: int
    kind: str
    radius: int
    reference: float | None = None


def cohen_pytlik_norm(rank: int, r: int) -> float:
    """Closed-form l2 convolution norm of sigma_r on the free group F_k:
    (1 + ((k-1)/k) r) (2k-1)^(-r/2)."""
    k = rank
    return (1.0 + (k - 1) / k * r) * (2 * k - 1) ** (-r / 2.0)


def _compression_matrix(model: GroupModel, ball: LayeredBall,
                        measure: RadialMeasure, R: int) -> sparse.csr_matrix:
    """Sparse matrix of the compression to l2(B_R) of right-convolution by
    the measure, in the ball's canonical basis order."""
    elements = list(ball.elements(up_to=R))
    dim = len(elements)
    index = {x: i for i, x in enumerate(elements)}
    multiply = model.multiply
    get = index.get
    rows_parts, cols_parts, data_parts = [], [], []
    base_cols = np.arange(dim, dtype=np.int64)
    for t, weight in measure.fn.items():
        targets = np.fromiter((get(multiply(u, t), -1) for u in elements),
                              dtype=np.int64, count=dim)
        mask = targets >= 0
        rows_parts.append(targets[mask])
        cols_parts.append(base_cols[mask])
        data_parts.append(np.full(int(mask.sum()), float(weight)))
    rows = np.concatenate(rows_parts)
    cols = np.concatenate(cols_parts)
    data = np.concatenate(data_parts)
    return sparse.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def operator_norm_truncated(model: GroupModel, ball: LayeredBall,
                            measure: RadialMeasure, R: int,
                            tol: float = 1e-10, max_iters: int = 10_000) -> NormEstimate:
    """Operator norm of the compression to l2(B_R) of right-convolution by a
    symmetric radial measure.

    Power iteration on T*T (positive semidefinite, so the Rayleigh quotient
    converges to ||T||^2) with start vector delta_e + 1e-3 * uniform(B_2);
    stops when the relative Rayleigh change drops below ``tol``.  The value
    is a lower bound for the norm on l2(Gamma), nondecreasing in R.
    """
    if R > ball.radius:
        raise ValueError(f"truncation {R} exceeds the enumerated radius {ball.radius}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not measure.is_symmetric(model):
        raise ValueError("operator norm estimation requires a symmetric measure")
    A = _compression_matrix(model, ball, measure, R)
    dim = A.shape[0]
    v = np.zeros(dim)
    v[0] = 1.0  # identity is element 0 in canonical order
    v[:ball.ball_size(min(2, R))] += 1e-3
    v /= np.linalg.norm(v)
    rayleigh = 0.0
    converged = False
    change = math.inf
    iters = 0
    for iters in range(1, max_iters + 1):
        w = A @ (A @ v)
        new = float(v @ w)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            rayleigh, converged, change = 0.0, True, 0.0
            break
        change = abs(new - rayleigh) / max(new, 1e-300)
        rayleigh = new
        v = w / norm_w
        if change < tol:
            converged = True
            break
    reference = None
    from .groups import FreeGroup
    if isinstance(model, FreeGroup) and measure.kind == "sphere":
        reference = cohen_pytlik_norm(model.rank, measure.radius)
    return NormEstimate(norm=math.sqrt(max(rayleigh, 0.0)), converged=converged,
                        iters=iters, last_rel_change=change, truncation_radius=R,
                        kind=measure.kind, radius=measure.radius, reference=reference)


@dataclass(frozen=True)
class BallNormProbe:
    rows: tuple          # (r, NormEstimate, norm * sqrt(|B_r|))
    fitted_exponent: float


def ball_rd_exponent_probe(model: GroupModel, ball: LayeredBall, radii, R: int,
                           tol: float = 1e-10, max_iters: int = 10_000) -> BallNormProbe:
    """Measure ||beta_r|| for each radius and fit the polynomial exponent of
    ||beta_r|| |B_r|^(1/2) against r by least squares on log-log scale."""
    radii = sorted(radii)
    if len(radii) < 3:
        raise ValueError("exponent fit needs at least 3 radii")
    rows = []
    for r in radii:
        est = operator_norm_truncated(model, ball, ball_measure(ball, r), R,
                                      tol=tol, max_iters=max_iters)
        rows.append((r, est, est.norm * math.sqrt(ball.ball_size(r))))
    xs = np.log([r for r, _, _ in rows])
    ys = np.log([y for _, _, y in rows])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return BallNormProbe(rows=tuple(rows), fitted_exponent=slope)
