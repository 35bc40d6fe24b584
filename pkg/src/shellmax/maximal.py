"""Exact Hardy-Littlewood maximal functions and weak-type measurements.

The maximal operator here takes the sup of closed-ball averages over
integer radii n >= 1 (all supported metrics are integer-valued, and the
continuous sup is equivalent up to a constant that gets absorbed into the
measured ratios).  A profile stores Mf exactly on a certified window: with
N* the least n for which |B_n| > ||f||_1 / eta_floor, every point at
distance >= N* from the support provably has Mf < eta_floor, so the window
of radius W = N* - 1 around the support captures every level set
{Mf >= eta} with eta >= eta_floor exactly.

Rational inputs are processed entirely in rational arithmetic; eta sweeps
run over exactly the attained values of Mf, so suprema are exact on the
window.  The Orlicz functional uses logarithm base 2, matching the dyadic
decomposition that produces it; a base change only rescales measured
constants by a fixed power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cayley import LayeredBall
from .errors import ResourceBudgetError
from .geometry import InequalityReport
from .groups import GroupModel
from .harmonic import FiniteFunction, convolve, sphere_measure, ball_measure
from .prng import Lcg


def _require_nonnegative(f: FiniteFunction):
    if not f.is_nonnegative():
        raise ValueError("the maximal operator is defined on |f|; pass absolute values")


@dataclass(frozen=True)
class MaximalProfile:
    """Exact Mf on the certified window around supp f."""
    f: FiniteFunction
    eta_floor: Fraction
    window_radius: int
    n_star: int
    values: dict            # x -> Mf(x), exact for every x in the window
    l1: object              # ||f||_1

    def level_set_size(self, eta) -> int:
        """|{Mf >= eta}| -- exact for eta >= eta_floor."""
        if eta < self.eta_floor:
            raise ValueError("level sets are certified only for eta >= eta_floor")
        return sum(1 for v in self.values.values() if v >= eta)

    def attained_values(self):
        """Distinct values of Mf on the window, descending."""
        return sorted(set(self.values.values()), reverse=True)


def ball_average_table(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                       n_max: int):
    """Cumulative ball masses around supp f: x -> [mass_0(x), ..., mass_{n_max}(x)]
    where mass_n(x) = sum of f over the closed ball of radius n at x.

    Only points within distance n_max of the support appear; everywhere
    else every mass is zero.
    """
    if n_max > ball.radius:
        raise ResourceBudgetError(
            f"ball averages need spheres up to {n_max} but the enumeration "
            f"stops at {ball.radius}", radius=n_max)
    multiply = model.multiply
    acc: dict = {}
    for n in range(n_max + 1):
        layer = ball.sphere(n)
        for u, fu in f.items():
            for t in layer:
                x = multiply(u, t)
                row = acc.get(x)
                if row is None:
                    row = acc[x] = [0] * (n_max + 1)
                row[n] += fu
        # masses are cumulative over radii
        if n:
            for row in acc.values():
                row[n] += row[n - 1]
    return acc


def maximal_value(model: GroupModel, ball: LayeredBall, f: FiniteFunction, x,
                  n_max: int):
    """max over n in [1, n_max] of the ball average of f at x (exact)."""
    _require_nonnegative(f)
    distance = model.distance
    dists = sorted((distance(x, u), fu) for u, fu in f.items())
    best = Fraction(0)
    mass = 0
    k = 0
    for n in range(1, n_max + 1):
        while k < len(dists) and dists[k][0] <= n:
            mass += dists[k][1]
            k += 1
        if mass:
            cand = Fraction(mass, ball.ball_size(n))
            if cand > best:
                best = cand
    return best


def maximal_function(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                     eta_floor) -> MaximalProfile:
    """Exact maximal profile of a nonnegative finite function.

    Raises ResourceBudgetError naming the required radius when the
    certified window does not fit inside the enumerated ball.
    """
    _require_nonnegative(f)
    eta_floor = Fraction(eta_floor) if not isinstance(eta_floor, float) else eta_floor
    if eta_floor <= 0:
        raise ValueError("eta_floor must be positive")
    l1 = f.l1()
    if l1 == 0:
        return MaximalProfile(f=f, eta_floor=eta_floor, window_radius=0,
                              n_star=1, values={}, l1=0)
    threshold = l1 / eta_floor
    n_star = next((n for n in range(1, ball.radius + 1) if ball.ball_size(n) > threshold),
                  None)
    if n_star is None:
        raise ResourceBudgetError(
            f"maximal window needs |B_n| > {float(threshold):.6g}; enlarge the "
            f"enumeration beyond radius {ball.radius}", radius=ball.radius + 1)
    table = ball_average_table(model, ball, f, n_star)
    values = {}
    for x, masses in table.items():
        if masses[n_star - 1] == 0:
            # d(x, supp f) = n_star: outside the window, certified < eta_floor
            continue
        best_num, best_den = 0, 1
        for n in range(1, n_star + 1):
            mass = masses[n]
            if mass * best_den > best_num * ball.ball_size(n):
                best_num, best_den = mass, ball.ball_size(n)
        values[x] = Fraction(best_num, best_den)
    assert Fraction(l1, ball.ball_size(n_star)) < eta_floor  # window certificate
    return MaximalProfile(f=f, eta_floor=eta_floor, window_radius=n_star - 1,
                          n_star=n_star, values=values, l1=l1)


def weak_type_ratio(profile: MaximalProfile):
    """sup over attained eta >= eta_floor of eta |{Mf >= eta}| / ||f||_1,
    together with the eta attaining it.  Exact for rational inputs."""
    if profile.l1 == 0:
        return Fraction(0), None
    counts: dict = {}
    for v in profile.values.values():
        if v >= profile.eta_floor:
            counts[v] = counts.get(v, 0) + 1
    best, arg = Fraction(0), None
    cumulative = 0
    for eta in sorted(counts, reverse=True):
        cumulative += counts[eta]
        ratio = eta * cumulative / profile.l1
        if ratio > best:
            best, arg = ratio, eta
    return best, arg


@dataclass(frozen=True)
class OrliczRecord:
    eta: object
    c: float
    value: float


def orlicz_sum(f: FiniteFunction, eta, c: float) -> OrliczRecord:
    """sum over f > eta of (f/eta) (log2(f/eta))^c; with c = 0 this is the
    plain mass sum over the superlevel set."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if c < 0:
        raise ValueError("c must be >= 0")
    total = 0.0
    for _, v in f.items():
        if v > eta:
            ratio = v / eta
            total += float(ratio) * (math.log2(float(ratio)) ** c if c else 1.0)
    return OrliczRecord(eta=eta, c=c, value=total)


def orlicz_weak_ratio(profile: MaximalProfile, eta, c: float) -> float:
    """|{Mf >= eta}| / orlicz_sum(f, eta, c).

    An empty Orlicz sum with a nonempty level set would report +inf; that
    cannot occur because Mf <= ||f||_inf.
    """
    level = profile.level_set_size(eta)
    record = orlicz_sum(profile.f, eta, c)
    if record.value == 0.0:
        return math.inf if level else 0.0
    return level / record.value


def distributional_check(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                         r: int, eta, b: float, inputs=None) -> InequalityReport:
    """Both sides of the distributional bound for sphere averages.

    lhs = |{w : (sigma_r * f)(w) >= eta}| exactly; rhs (with the constant
    factored out) = r^{2b} * sum over 1 <= 2^n <= 2 |S_r| of
    sqrt(2^n / |S_r|) 2^n |{f >= 2^{n-1} eta}|.
    """
    _require_nonnegative(f)
    if r < 1:
        raise ValueError("r must be >= 1")
    conv = convolve(model, sphere_measure(ball, r).fn, f)
    lhs = sum(1 for _, v in conv.items() if v >= eta)
    sphere_size = ball.sphere_sizes[r]
    values = sorted((v for _, v in f.items()), reverse=True)
    rhs = 0.0
    n = 0
    while 2 ** n <= 2 * sphere_size:
        cut = Fraction(2) ** (n - 1) * eta
        level = 0
        for v in values:
            if v >= cut:
                level += 1
            else:
                break
        rhs += math.sqrt(2 ** n / sphere_size) * 2 ** n * level
        n += 1
    rhs *= r ** (2 * b)
    return InequalityReport.build(
        "distributional", {"r": r, "eta": float(eta), "b": b}, lhs, rhs,
        dict(inputs or {}, support=len(f)))


def distributional_sweep(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                         r: int, b: float, inputs=None) -> list:
    """distributional_check over every attained value of sigma_r * f.

    The convolution is computed once; each eta then costs one binary search
    per dyadic term, so sweeping all attained values is barely more
    expensive than checking one.  Returns reports in descending eta order.
    """
    _require_nonnegative(f)
    if r < 1:
        raise ValueError("r must be >= 1")
    conv_values = sorted((v for _, v in
                          convolve(model, sphere_measure(ball, r).fn, f).items()),
                         reverse=True)
    f_values = sorted((v for _, v in f.items()), reverse=True)
    sphere_size = ball.sphere_sizes[r]
    dyadic = []
    n = 0
    while 2 ** n <= 2 * sphere_size:
        dyadic.append((Fraction(2) ** (n - 1), math.sqrt(2 ** n / sphere_size) * 2 ** n))
        n += 1
    reports = []
    etas = sorted(set(conv_values), reverse=True)
    lhs = 0
    k = 0
    for eta in etas:
        while k < len(conv_values) and conv_values[k] >= eta:
            k += 1
        lhs = k
        rhs = 0.0
        for scale, weight in dyadic:
            rhs += weight * _count_at_least(f_values, scale * eta)
        rhs *= r ** (2 * b)
        reports.append(InequalityReport.build(
            "distributional", {"r": r, "eta": float(eta), "b": b}, lhs, rhs,
            dict(inputs or {}, support=len(f))))
    return reports


def _count_at_least(descending, cut) -> int:
    """Count of entries >= cut in a descending-sorted list."""
    lo, hi = 0, len(descending)
    while lo < hi:
        mid = (lo + hi) // 2
        if descending[mid] >= cut:
            lo = mid + 1
        else:
            hi = mid
    return lo


def dyadic_corpus(model: GroupModel, ball: LayeredBall, support_radius: int,
                  count: int, seed: int, include_prob_inv: int = 4,
                  max_log: int = 6) -> list:
    """Seeded corpus of random dyadic-valued functions supported in the
    closed ball of ``support_radius``: each element joins the support with
    probability 1/include_prob_inv and carries a value 2^k, k < max_log.
    Fixed in code so corpora are identical across machines."""
    lcg = Lcg(seed)
    domain = list(ball.elements(up_to=support_radius))
    corpus = []
    for _ in range(count):
        data = {}
        for x in domain:
            if lcg.next_below(include_prob_inv) == 0:
                data[x] = 2 ** lcg.next_below(max_log)
        if not data:
            data[model.identity()] = 1
        corpus.append(FiniteFunction(data))
    return corpus


@dataclass(frozen=True)
class StrongLpProbe:
    rows: tuple          # (n, ||beta_n * f||_p, ratio to ||f||_p)
    partial_sums: tuple  # running sum of q^{n/8} ||beta_n * f||_2 / ||f||_2


def strong_lp_probe(model: GroupModel, ball: LayeredBall, f: FiniteFunction,
                    p: float, radii: Sequence[int], q: float) -> StrongLpProbe:
    """Exact lp norms of ball averages of |f| for p in (1, inf], plus the
    exponential-decay partial sums sum q^{n/8} ||beta_n * f||_2 / ||f||_2."""
    if p <= 1:
        raise ValueError("this probe needs p > 1; the weak-type path handles p = 1")
    _require_nonnegative(f)
    fp = f.lp(p)
    f2 = f.l2()
    rows = []
    partial = []
    running = 0.0
    for n in sorted(radii):
        averaged = convolve(model, ball_measure(ball, n).fn, f)
        rows.append((n, averaged.lp(p), averaged.lp(p) / fp if fp else 0.0))
        if f2:
            running += q ** (n / 8.0) * averaged.l2() / f2
        partial.append(running)
    return StrongLpProbe(rows=tuple(rows), partial_sums=tuple(partial))
