"""Breadth-first sphere enumeration and growth-sequence analysis.

``enumerate_ball`` builds the layered ball S_0, ..., S_R by frontier
expansion with a global dedup set: because normal forms are geodesic, an
element first reached at step n has word length exactly n, so no word
problem search is ever needed.  Layers are stored sorted in the canonical
shortlex order, which makes every downstream artifact deterministic.

``fit_growth`` detects the minimal integer linear recurrence satisfied by
the tail of a sphere-size sequence (exact rational elimination, increasing
order search), extracts the dominant real root q and its multiplicity from
the characteristic polynomial (Yun square-free decomposition plus
sign-change bisection), and reports the least two-sided constant C with
C^-1 n^d q^n <= |S_n| <= C n^d q^n on the enumerated range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ResourceBudgetError
from .groups import GroupModel

DEFAULT_BUDGET = 50_000_000


class LayeredBall:
    """Spheres S_0..S_R of a group model, each sorted canonically.

    Immutable after construction; safe to share.  ``global_index`` numbers
    elements 0.. by (layer, position), the basis order used for truncated
    operators.
    """

    def __init__(self, model: GroupModel, spheres: list):
        self.model = model
        self.spheres = tuple(tuple(layer) for layer in spheres)
        self.radius = len(self.spheres) - 1
        self.sphere_sizes = tuple(len(layer) for layer in self.spheres)
        sizes = []
        total = 0
        for s in self.sphere_sizes:
            total += s
            sizes.append(total)
        self.ball_sizes = tuple(sizes)  # |closed ball of radius n|
        index = {}
        pos = 0
        for n, layer in enumerate(self.spheres):
            for k, x in enumerate(layer):
                index[x] = (n, k, pos)
                pos += 1
        self._index = index

    def sphere(self, n: int) -> tuple:
        return self.spheres[n]

    def ball_size(self, n: int) -> int:
        return self.ball_sizes[n]

    def layer_of(self, x) -> int:
        return self._index[x][0]

    def global_index(self, x) -> int:
        return self._index[x][2]

    def __contains__(self, x) -> bool:
        return x in self._index

    def elements(self, up_to: int | None = None):
        """Iterate elements in canonical order through radius ``up_to``."""
        stop = self.radius if up_to is None else up_to
        for n in range(stop + 1):
            yield from self.spheres[n]

    def __repr__(self):
        return f"LayeredBall({self.model.spec()!r}, R={self.radius}, |B|={self.ball_sizes[-1]})"


def enumerate_ball(model: GroupModel, radius: int, budget: int = DEFAULT_BUDGET) -> LayeredBall:
    """Enumerate the closed balls B_0..B_R exactly.

    Raises ResourceBudgetError naming the offending radius as soon as the
    running element count would exceed ``budget``.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    identity = model.identity()
    gens = model.generators()
    seen = {identity}
    spheres = [[identity]]
    frontier = [identity]
    total = 1
    for n in range(1, radius + 1):
        fresh = set()
        multiply = model.multiply
        for x in frontier:
            for g in gens:
                y = multiply(x, g)
                if y not in seen:
                    seen.add(y)
                    fresh.add(y)
        total += len(fresh)
        if total > budget:
            raise ResourceBudgetError(
                f"ball of radius {n} for {model.spec()!r} exceeds the element "
                f"budget ({total} > {budget})", radius=n)
        frontier = sorted(fresh, key=model.sort_key)
        spheres.append(frontier)
    return LayeredBall(model, spheres)


# ---------------------------------------------------------------------------
# exact polynomial arithmetic over Fractions (ascending coefficient lists)
# ---------------------------------------------------------------------------

def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_derivative(p):
    return _poly_trim([k * c for k, c in enumerate(p)][1:])


def _poly_divmod(a, b):
    a = list(a)
    out = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        coef = a[k + len(b) - 1] / lead
        out[k] = coef
        if coef:
            for j, bc in enumerate(b):
                a[k + j] -= coef * bc
    return _poly_trim(out), _poly_trim(a)


def _poly_gcd(a, b):
    a, b = list(a), list(b)
    while b:
        a, b = b, _poly_divmod(a, b)[1]
    if a:
        lead = a[-1]
        a = [c / lead for c in a]  # monic
    return a


def _poly_eval(p, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def _poly_eval_exact(p, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _squarefree_decomposition(p):
    """Yun's algorithm: return [(factor, multiplicity), ...] with factors
    squarefree, pairwise coprime, and p = prod factor^multiplicity."""
    out = []
    g = _poly_gcd(p, _poly_derivative(p))
    if len(g) <= 1:
        return [(list(p), 1)]
    w = _poly_divmod(p, g)[0]
    y = _poly_divmod(_poly_derivative(p), g)[0]
    z = _poly_trim([yc - dc for yc, dc in
                    zip(y + [Fraction(0)] * len(w), _poly_derivative(w) + [Fraction(0)] * len(y))])
    i = 1
    while len(w) > 1:
        g_i = _poly_gcd(w, z)
        if len(g_i) > 1:
            out.append((g_i, i))
        w_next = _poly_divmod(w, g_i)[0]
        y = _poly_divmod(z, g_i)[0]
        z = _poly_trim([yc - dc for yc, dc in
                        zip(y + [Fraction(0)] * len(w_next),
                            _poly_derivative(w_next) + [Fraction(0)] * len(y))])
        w = w_next
        i += 1
    return out


def _largest_real_root(p, tol: float = 1e-12):
    """Largest real root of a squarefree polynomial in (0, inf), or None.

    Sign-change scan downward from the Cauchy bound followed by bisection;
    exact integer roots are snapped via exact evaluation.
    """
    lead = float(p[-1])
    bound = 1.0 + max(abs(float(c) / lead) for c in p[:-1]) if len(p) > 1 else 1.0
    sign_at = lambda x: _poly_eval(p, x) * lead  # noqa: E731  (positive beyond bound)
    step = max(bound, 1.0) / 512.0
    x = bound
    hi = None
    while x > tol:
        if sign_at(x) <= 0:
            hi = x + step
            break
        x -= step
    if hi is None:
        return None
    lo = max(x, 0.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            break
        if sign_at(mid) <= 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    snap = Fraction(round(root))
    if abs(root - float(snap)) < 1e-6 and _poly_eval_exact(p, snap) == 0:
        return float(snap)
    return root


def _solve_exact(rows, rhs):
    """Solve an exact linear system by Gauss-Jordan over Fractions.

    Returns a solution vector (free variables set to 0) or None when the
    system is inconsistent.
    """
    m, n = len(rows), len(rows[0])
    aug = [[Fraction(c) for c in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        pivot = next((k for k in range(r, m) if aug[k][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for k in range(m):
            if k != r and aug[k][c] != 0:
                factor = aug[k][c]
                aug[k] = [v - factor * w for v, w in zip(aug[k], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for k in range(r, m):
        if aug[k][n] != 0:
            return None
    sol = [Fraction(0)] * n
    for row, c in enumerate(pivots):
        sol[c] = aug[row][n]
    return sol


@dataclass(frozen=True)
class Recurrence:
    """s_n = sum coeffs[k] * s_{n-1-k}, valid for all n >= valid_from."""
    coeffs: tuple
    valid_from: int

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def predict(self, history: Sequence[int], n: int):
        return sum(c * history[n - 1 - k] for k, c in enumerate(self.coeffs))

    def characteristic_polynomial(self):
        """Ascending coefficients of x^order - c1 x^(order-1) - ... - c_order."""
        p = [-c for c in reversed(self.coeffs)] + [Fraction(1)]
        return [Fraction(c) for c in p]


@dataclass(frozen=True)
class GrowthFit:
    """Parameters of almost-exact polynomial-exponential growth, with the
    recurrence evidence they were derived from."""
    d: int
    q: float
    c_gr: float
    recurrence: Recurrence | None
    flags: frozenset = field(default_factory=frozenset)

    @property
    def polynomial_growth(self) -> bool:
        return "polynomial_growth" in self.flags


def find_minimal_recurrence(sizes: Sequence[int]) -> Recurrence | None:
    """Minimal-order integer linear recurrence satisfied by the tail.

    For each order k (increasing), the coefficients are solved exactly from
    the last k equations and verified backwards; the candidate is accepted
    when it reproduces at least k held-out terms, i.e. holds from an index
    n0 with len(sizes) - n0 >= 2k.
    """
    N = len(sizes)
    s = [Fraction(v) for v in sizes]
    for k in range(1, N // 2 + 1):
        rows = [[s[n - 1 - j] for j in range(k)] for n in range(N - k, N)]
        rhs = [s[n] for n in range(N - k, N)]
        coeffs = _solve_exact(rows, rhs)
        if coeffs is None:
            continue
        n0 = N - k
        while n0 - 1 >= k and sum(c * s[n0 - 2 - j] for j, c in enumerate(coeffs)) == s[n0 - 1]:
            n0 -= 1
        if N - n0 >= 2 * k:
            return Recurrence(tuple(coeffs), n0)
    return None


def _two_sided_constant(sizes: Sequence[int], d: int, q: float) -> float:
    worst = 1.0
    for n in range(1, len(sizes)):
        ref = (n ** d) * (q ** n)
        worst = max(worst, sizes[n] / ref, ref / sizes[n])
    return worst


def fit_growth(sizes: Sequence[int]) -> GrowthFit:
    """Fit almost-exact polynomial-exponential growth to sphere sizes.

    ``sizes[n]`` must be |S_n| for n = 0..R with R >= 7.  Returns q as the
    dominant real root of the detected recurrence's characteristic
    polynomial and d as (multiplicity - 1); subexponential sequences are
    flagged ``polynomial_growth`` with q = 1.  When no recurrence of order
    <= len/2 fits the tail, a log-space regression fit is returned flagged
    ``nonrational_evidence``.
    """
    sizes = list(sizes)
    if len(sizes) < 8:
        raise ValueError("fit_growth needs at least 8 sphere sizes")
    if any(v <= 0 for v in sizes[1:]):
        raise ValueError("sphere sizes must be positive (the group is infinite)")

    rec = find_minimal_recurrence(sizes)
    if rec is not None:
        best = None  # (root, multiplicity)
        for factor, mult in _squarefree_decomposition(rec.characteristic_polynomial()):
            root = _largest_real_root(factor)
            if root is not None and (best is None or root > best[0] + 1e-12):
                best = (root, mult)
        if best is not None and best[0] > 1.0 - 1e-9:
            q, mult = best
            d = mult - 1
            flags = set()
            if abs(q - 1.0) <= 1e-9:
                q = 1.0
                flags.add("polynomial_growth")
            c_gr = _two_sided_constant(sizes, d, q)
            return GrowthFit(d=d, q=q, c_gr=c_gr, recurrence=rec, flags=frozenset(flags))

    # regression-only evidence: log s_n ~ log C + d log n + n log q
    ns = np.arange(1, len(sizes))
    design = np.column_stack([np.ones_like(ns, dtype=float), np.log(ns), ns])
    sol, *_ = np.linalg.lstsq(design, np.log([float(v) for v in sizes[1:]]), rcond=None)
    q = float(np.exp(sol[2]))
    d = max(0, round(float(sol[1])))
    flags = {"nonrational_evidence"}
    if q <= 1.0 + 1e-9:
        q = 1.0
        flags.add("polynomial_growth")
    return GrowthFit(d=d, q=q, c_gr=_two_sided_constant(sizes, d, q),
                     recurrence=None, flags=frozenset(flags))


def coornaert_constant(sizes: Sequence[int], q: float) -> float:
    """Least C with C^-1 q^n <= |S_n| <= C q^n on the enumerated range."""
    return _two_sided_constant(sizes, 0, q)


def product_sphere_identity_check(left: LayeredBall, right: LayeredBall, n: int,
                                  budget: int = DEFAULT_BUDGET) -> bool:
    """Verify |S_n(product)| = sum_i |S1_{n-i}| |S2_i| against a direct
    enumeration of the product model (two independent computations)."""
    if n > left.radius or n > right.radius:
        raise ValueError("n exceeds an input enumeration")
    from .groups import DirectProduct
    expected = sum(left.sphere_sizes[n - i] * right.sphere_sizes[i] for i in range(n + 1))
    product = enumerate_ball(DirectProduct(left.model, right.model), n, budget=budget)
    return product.sphere_sizes[n] == expected
