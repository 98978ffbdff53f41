"""Numeric minimax lower-bound constructions.

Two-point arguments (KL and Hellinger flavors), moment-matched measure
pairs built by linear programming over a discretized support, the tilted
variant that fixes the first moment, total-variation control for Poisson
mixtures, and the three-branch composite bound that ties risk to the
best polynomial approximation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import brentq
from scipy.stats import poisson

from .errors import ConfigurationError, NumericalError, SupportError
from .functionals import (
    Functional,
    ProbabilityVector,
    additive_functional,
    as_prob_array,
)
from .polyapprox import remez_best_approx
from .simplexlp import simplex_solve

__all__ = [
    "divergence",
    "TwoPointPair",
    "two_point_pair",
    "canonical_two_point_pair",
    "tail_shift_pair",
    "le_cam_bound",
    "hellinger_le_cam_bound",
    "MeasurePair",
    "moment_matched_pair",
    "tilted_pair",
    "PoissonMixtureTV",
    "poisson_mixture_tv",
    "CompositeBoundResult",
    "composite_lower_bound",
    "hoelder_norm",
    "log_speed_constants",
    "fitted_bound_constants",
    "simplex_max_power_sum",
    "simplex_max_p_log2p",
]

_KINDS = ("kl", "chi2", "hellinger", "tv")


def _as_callable(f):
    return f.eval if hasattr(f, "eval") else f


def divergence(P, Q, kind: str) -> float:
    """Divergence between two distributions on the same alphabet.

    kl: KL(P||Q) with natural log and 0 log 0 = 0.  chi2: sum of
    (p-q)^2/q over the support of Q.  hellinger: the squared Hellinger
    distance in the normalization where disjoint supports give 4, i.e.
    2 sum (sqrt p - sqrt q)^2, so that 1 - H^2/4 is the Bhattacharyya
    coefficient.  tv: half the l1 distance.  kl and chi2 raise
    SupportError when the reference Q vanishes where the mass does not.
    """
    p = as_prob_array(P)
    q = as_prob_array(Q)
    if p.shape != q.shape:
        raise ConfigurationError(
            f"distributions have different alphabet sizes {p.size} and {q.size}"
        )
    kind = kind.lower()
    if kind not in _KINDS:
        raise ConfigurationError(f"divergence kind must be one of {_KINDS}, got {kind!r}")
    if kind in ("kl", "chi2"):
        bad = np.flatnonzero((q == 0.0) & (p > 0.0))
        if bad.size:
            raise SupportError(
                f"symbol {int(bad[0])} has positive mass under P but zero under Q"
            )
    if kind == "kl":
        mask = p > 0.0
        return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    if kind == "chi2":
        mask = q > 0.0
        d = p[mask] - q[mask]
        return float(np.sum(d * d / q[mask]))
    if kind == "hellinger":
        d = np.sqrt(p) - np.sqrt(q)
        return float(2.0 * np.sum(d * d))
    return float(0.5 * np.sum(np.abs(p - q)))


@dataclass(frozen=True)
class TwoPointPair:
    """Pair (1-p, p/(k-1), ...) vs (1-q, q/(k-1), ...) with its bound data.

    kl_bound is the closed form (p-q)^2 / (2p(1-p)), the halved
    chi-square with reference P; it tracks the actual KL only to third
    order in p-q, so treat it as a scale, not a certified bound.
    """

    P: ProbabilityVector
    Q: ProbabilityVector
    p: float
    q: float
    kl_bound: float
    theta_gap: float


def two_point_pair(phi: Functional, k: int, p: float, q: float) -> TwoPointPair:
    """Build the single-heavy-symbol two-point family for a functional."""
    if k < 2:
        raise ConfigurationError(f"alphabet size must be >= 2, got {k}")
    for name, v in (("p", p), ("q", q)):
        if not 0.0 < v < 1.0:
            raise ConfigurationError(f"{name} must lie in (0, 1), got {v!r}")
    P = ProbabilityVector(np.concatenate([[1.0 - p], np.full(k - 1, p / (k - 1))]))
    Q = ProbabilityVector(np.concatenate([[1.0 - q], np.full(k - 1, q / (k - 1))]))
    gap = additive_functional(P, phi) - additive_functional(Q, phi)
    return TwoPointPair(
        P=P,
        Q=Q,
        p=float(p),
        q=float(q),
        kl_bound=(p - q) ** 2 / (2.0 * p * (1.0 - p)),
        theta_gap=float(gap),
    )


def canonical_two_point_pair(
    phi: Functional, k: int, n: int, p: float = 0.5, c: float = 1.0
) -> TwoPointPair:
    """Two-point pair at the 1/sqrt(n) perturbation scale: q = p - c/sqrt(n)."""
    if n <= 0:
        raise ConfigurationError(f"n must be positive, got {n}")
    q = p - c / math.sqrt(n)
    if not 0.0 < q < 1.0:
        raise ConfigurationError(
            f"perturbed mass q={q:.6g} escapes (0, 1); reduce c or increase n"
        )
    return two_point_pair(phi, k, p, q)


def tail_shift_pair(beta: float, delta: float, k: int):
    """Uniform-tail pair: (k-1) symbols at beta/(k-1) vs (beta+delta)/(k-1).

    The last symbol absorbs the shift, so the total variation distance
    is exactly delta.  Returns (P, Q) as ProbabilityVectors.
    """
    if k < 2:
        raise ConfigurationError(f"alphabet size must be >= 2, got {k}")
    if not (0.0 < beta and 0.0 < delta and beta + delta < 1.0):
        raise ConfigurationError(
            f"need 0 < beta, 0 < delta, beta + delta < 1; got beta={beta!r} delta={delta!r}"
        )
    P = ProbabilityVector(np.concatenate([np.full(k - 1, beta / (k - 1)), [1.0 - beta]]))
    Q = ProbabilityVector(
        np.concatenate([np.full(k - 1, (beta + delta) / (k - 1)), [1.0 - beta - delta]])
    )
    return P, Q


def le_cam_bound(P, Q, phi: Functional, n: int) -> float:
    """Two-point risk bound (1/4) (theta(P)-theta(Q))^2 exp(-n KL(P,Q))."""
    gap = additive_functional(P, phi) - additive_functional(Q, phi)
    return 0.25 * gap * gap * math.exp(-n * divergence(P, Q, "kl"))


def hellinger_le_cam_bound(P, Q, phi: Functional, n: int) -> float:
    """Two-point bound (1/2) gap^2 (1 - sqrt(1 - (1 - H^2/4)^(2n)))."""
    gap = additive_functional(P, phi) - additive_functional(Q, phi)
    bc = 1.0 - divergence(P, Q, "hellinger") / 4.0
    bc = min(max(bc, 0.0), 1.0)
    inner = 1.0 - bc ** (2 * n)
    return 0.5 * gap * gap * (1.0 - math.sqrt(max(inner, 0.0)))


@dataclass(frozen=True)
class MeasurePair:
    """Two discrete measures with matching moments and a phi-mean gap.

    w0 and w1 are weights on the common support; moments 1..matched_orders
    agree (order 0 by normalization).  gap is the difference of phi-means,
    maximized by construction; expected_gap is the Remez prediction it is
    checked against.
    """

    support: np.ndarray
    w0: np.ndarray
    w1: np.ndarray
    matched_orders: int
    gap: float
    expected_gap: float = float("nan")
    warnings: tuple = ()

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        w0 = np.asarray(self.w0, dtype=float)
        w1 = np.asarray(self.w1, dtype=float)
        if not (support.shape == w0.shape == w1.shape) or support.ndim != 1:
            raise ConfigurationError("support, w0, w1 must be 1-d arrays of equal length")
        if w0.min() < -1e-10 or w1.min() < -1e-10:
            raise NumericalError("measure weights must be non-negative")
        for arr, nm in ((w0, "w0"), (w1, "w1")):
            total = math.fsum(arr.tolist())
            if abs(total - 1.0) > 1e-8:
                raise NumericalError(f"{nm} sums to {total!r}, expected 1")
        for arr in (support, w0, w1):
            arr.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "w0", np.clip(w0, 0.0, None))
        object.__setattr__(self, "w1", np.clip(w1, 0.0, None))

    def moment_residuals(self) -> np.ndarray:
        """|w0-moment minus w1-moment| for orders 1..matched_orders."""
        out = np.empty(self.matched_orders)
        for m in range(1, self.matched_orders + 1):
            xm = self.support**m
            out[m - 1] = abs(float(xm @ self.w0) - float(xm @ self.w1))
        return out


def moment_matched_pair(f, L: int, interval, grid_size: int | None = None) -> MeasurePair:
    """Extremal pair of measures with moments 1..L matched, maximal f-gap.

    Solves the discretized linear program over a Chebyshev-spaced grid
    (mass concentrates near the interval ends, where the extremal
    measures live).  Moment constraints are imposed in the Chebyshev
    basis of the normalized coordinate, which spans the same space as
    raw moments but keeps the tableau well conditioned.  The resulting
    gap is checked against twice the best-approximation error; a
    mismatch above 5% relative is attached as a warning.
    """
    fn = _as_callable(f)
    if L < 1:
        raise ConfigurationError(f"matched order L must be >= 1, got {L}")
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 <= lo < hi):
        raise ConfigurationError(f"invalid interval [{lo!r}, {hi!r}]")
    min_grid = 50 * (L + 2)
    if grid_size is None:
        grid_size = max(min_grid, 240)
    if grid_size < min_grid:
        raise ConfigurationError(
            f"grid_size {grid_size} below the minimum 50*(L+2) = {min_grid}"
        )

    j = np.arange(grid_size)
    u = 0.5 * (1.0 - np.cos(np.pi * j / (grid_size - 1)))
    x = lo + (hi - lo) * u
    fx = np.asarray(fn(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ConfigurationError("function is not finite on the support grid")

    # Chebyshev rows in the normalized coordinate; orders 1..L
    V = npcheb.chebvander(2.0 * u - 1.0, L)
    G = grid_size
    A = np.zeros((L + 2, 2 * G))
    A[0, :G] = 1.0
    A[1, G:] = 1.0
    A[2:, :G] = V[:, 1:].T
    A[2:, G:] = -V[:, 1:].T
    b = np.zeros(L + 2)
    b[0] = b[1] = 1.0
    c = np.concatenate([fx, -fx])

    sol = simplex_solve(c, A, b)
    w0 = sol.x[:G]
    w1 = sol.x[G:]
    gap = float(sol.value)

    approx = remez_best_approx(fn, L, (lo, hi))
    expected = 2.0 * approx.sup_error
    warnings = []
    if not approx.converged:
        warnings.append(f"best-approximation reference did not converge at degree {L}")
    if expected > 1e-12:
        if abs(gap - expected) / expected > 0.05:
            warnings.append(
                f"LP gap {gap:.6g} differs from twice the best-approximation error "
                f"{expected:.6g} by more than 5%"
            )
    elif gap > 1e-8:
        warnings.append(f"LP gap {gap:.3g} expected to vanish for a degree-{L} polynomial")

    pair = MeasurePair(
        support=x,
        w0=w0,
        w1=w1,
        matched_orders=L,
        gap=max(gap, 0.0),
        expected_gap=expected,
        warnings=tuple(warnings),
    )
    resid = pair.moment_residuals().max() if L >= 1 else 0.0
    if resid > 1e-8:
        raise NumericalError(f"moment constraints violated by {resid:.3g}")
    return pair


def tilted_pair(phi, L: int, gamma: float, eta: float, grid_size: int | None = None) -> MeasurePair:
    """Measure pair with both first moments pinned at gamma.

    Reweights a moment-matched base pair for f(x)/x on [gamma, gamma/eta]
    by gamma/u and parks the leftover mass in an atom at zero; the
    f-mean gap becomes 2 gamma E_L(f(x)/x, [gamma, gamma/eta]) and
    moments 1..L+1 match.  Requires f(0) = 0 so the atom contributes
    nothing to the gap.
    """
    fn = _as_callable(phi)
    if not 0.0 < gamma <= eta < 1.0:
        raise ConfigurationError(
            f"need 0 < gamma <= eta < 1, got gamma={gamma!r} eta={eta!r}"
        )
    f0 = float(fn(0.0))
    if not abs(f0) <= 1e-12:
        raise ConfigurationError(f"tilted construction needs f(0) = 0, got {f0!r}")

    def fstar(x):
        return np.asarray(fn(x), dtype=float) / np.asarray(x, dtype=float)

    base = moment_matched_pair(fstar, L, (gamma, gamma / eta), grid_size)
    tilt = gamma / base.support
    w0 = base.w0 * tilt
    w1 = base.w1 * tilt
    atom0 = 1.0 - math.fsum(w0.tolist())
    atom1 = 1.0 - math.fsum(w1.tolist())
    if min(atom0, atom1) < -1e-10:
        raise NumericalError(
            f"tilted atom mass negative ({min(atom0, atom1):.3g}); support below gamma?"
        )
    support = np.concatenate([[0.0], base.support])
    pair = MeasurePair(
        support=support,
        w0=np.concatenate([[max(atom0, 0.0)], w0]),
        w1=np.concatenate([[max(atom1, 0.0)], w1]),
        matched_orders=L + 1,
        gap=gamma * base.gap,
        expected_gap=gamma * base.expected_gap,
        warnings=base.warnings,
    )
    resid = pair.moment_residuals().max()
    if resid > 1e-8:
        raise NumericalError(f"tilted moment constraints violated by {resid:.3g}")
    return pair


@dataclass(frozen=True)
class PoissonMixtureTV:
    numeric_tv: float
    bound: float
    trunc: int
    max_rate: float


def poisson_mixture_tv(pair: MeasurePair, n: int, k: int, trunc: int | None = None) -> PoissonMixtureTV:
    """Total variation between the two Poisson mixtures at rates n*x/k.

    numeric_tv sums |mixture pmf difference| over 0..trunc; trunc
    defaults to max_rate + 12 sqrt(max_rate) + 50, which leaves Poisson
    tail mass below 1e-12.  bound is (2eM/L)^L when the matched order L
    exceeds 2eM, else +inf (the moment argument gives nothing there).
    """
    rates = n * pair.support / k
    M = float(rates.max())
    if trunc is None:
        trunc = int(math.ceil(M + 12.0 * math.sqrt(M) + 50.0))
    tail = float(poisson.sf(trunc, M)) if M > 0 else 0.0
    if tail >= 1e-12:
        raise NumericalError(
            f"truncation {trunc} leaves Poisson tail mass {tail:.3g} at rate {M:.6g}"
        )
    j = np.arange(trunc + 1)
    pmf = poisson.pmf(j[:, None], rates[None, :])
    diff = pmf @ pair.w0 - pmf @ pair.w1
    tv = 0.5 * float(np.abs(diff).sum())
    L = pair.matched_orders
    if L > 2.0 * math.e * M:
        bound = float(np.exp(L * (np.log(2.0 * math.e * M) - np.log(L)))) if M > 0 else 0.0
    else:
        bound = float("inf")
    return PoissonMixtureTV(numeric_tv=tv, bound=bound, trunc=int(trunc), max_rate=M)


@dataclass(frozen=True)
class CompositeBoundResult:
    bound: float
    terms: dict
    condition: int
    e_l: float
    gamma: float | None
    alpha: float


def composite_lower_bound(
    phi,
    n: int,
    k: int,
    lam: float,
    L: int,
    d: float,
    alpha: float | None = None,
    W: float = None,
    Wprime: float = None,
) -> CompositeBoundResult:
    """Risk bound d^2/32 (7/8 - k(2e n lam / Lk)^L) minus correction terms.

    One of two side conditions must verify numerically: either
    lam <= 1/12 with 2k E_L(f, [0, lam/k]) >= d, or lam <= sqrt(k)/12
    with gamma = lam/(2 L^2 k) and 2k gamma E_L(f(x)/x, [gamma, lam/k])
    >= d.  W and Wprime scale the correction terms and are calibration
    inputs; fitted_bound_constants gives a documented estimate.  The
    correction branch is chosen by alpha (< 1, = 1, in (1,2)).
    """
    fn = _as_callable(phi)
    if alpha is None:
        alpha = getattr(phi, "alpha", None)
        if alpha is None:
            raise ConfigurationError("alpha is required when phi does not carry one")
    if W is None or Wprime is None:
        raise ConfigurationError(
            "W and Wprime are calibration inputs; use fitted_bound_constants(phi, alpha)"
        )
    if not 0.0 < alpha < 2.0:
        raise ConfigurationError(f"alpha must lie in (0, 2), got {alpha!r}")
    if L < 1 or lam <= 0 or d < 0:
        raise ConfigurationError("need L >= 1, lam > 0, d >= 0")

    checks = []
    condition = 0
    gamma = None
    e_l = float("nan")
    if lam <= 1.0 / 12.0:
        approx = remez_best_approx(fn, L, (0.0, lam / k))
        e_l = approx.sup_error
        lhs = 2.0 * k * e_l
        checks.append(f"condition 1: 2k E_L = {lhs:.6g} vs d = {d:.6g}")
        if lhs >= d:
            condition = 1
    else:
        checks.append(f"condition 1: lam = {lam:.6g} > 1/12")
    if condition == 0:
        if lam <= math.sqrt(k) / 12.0:
            g = lam / (2.0 * L**2 * k)
            if 0.0 < g < lam / k and g < 1.0:

                def fstar(x):
                    return np.asarray(fn(x), dtype=float) / np.asarray(x, dtype=float)

                approx = remez_best_approx(fstar, L, (g, lam / k))
                e_l = approx.sup_error
                lhs = 2.0 * k * g * e_l
                checks.append(f"condition 2: 2k gamma E_L = {lhs:.6g} vs d = {d:.6g}")
                if lhs >= d:
                    condition = 2
                    gamma = g
            else:
                checks.append(f"condition 2: degenerate interval [gamma, lam/k] at gamma={g:.3g}")
        else:
            checks.append(f"condition 2: lam = {lam:.6g} > sqrt(k)/12")
    if condition == 0:
        raise ConfigurationError(
            "neither side condition verifiable: " + "; ".join(checks)
        )

    base = 2.0 * math.e * n * lam / (L * k)
    tv_term = k * math.exp(L * math.log(base)) if base > 0 else 0.0
    main = d**2 / 32.0 * (7.0 / 8.0 - tv_term)
    terms = {"main": main, "tv_term": tv_term}
    if alpha < 1.0:
        terms["mass_shift"] = W * k ** (1.0 - 2.0 * alpha) * lam ** (2.0 * alpha)
        terms["concentration"] = Wprime * k ** (2.0 - 2.0 * alpha) * math.exp(-n / 32.0)
        terms["normalization"] = (
            4.0 ** (2.0 * alpha) * Wprime * k ** (2.0 - 2.0 * alpha) * k**-alpha * lam ** (2.0 * alpha)
        )
    elif alpha == 1.0:
        eps = 4.0 * lam / math.sqrt(k)
        terms["mass_shift"] = W * lam**2 * math.log(lam / (math.e * k)) ** 2 / k
        terms["concentration"] = Wprime * math.log(math.e * k) ** 2 * math.exp(-n / 32.0)
        terms["normalization"] = 16.0 * Wprime * (lam**2 / k) * math.log(math.e * k) ** 2
        terms["renormalization"] = Wprime * (1.0 + eps) ** 2 * math.log(1.0 + eps) ** 2
    else:
        terms["mass_shift"] = W * k ** (1.0 - 2.0 * alpha) * lam ** (2.0 * alpha)
        terms["concentration"] = Wprime * math.exp(-n / 32.0)
        terms["normalization"] = 16.0 * Wprime * lam**2 / k**2
    correction = math.fsum(v for key, v in terms.items() if key not in ("main", "tv_term"))
    terms["total_correction"] = correction
    bound = main - correction
    return CompositeBoundResult(
        bound=bound, terms=terms, condition=condition, e_l=e_l, gamma=gamma, alpha=float(alpha)
    )


def hoelder_norm(f, beta: float, interval=(0.0, 1.0), grid_points: int = 768) -> float:
    """Grid estimate of sup |f(x)-f(y)| / |x-y|^beta over the interval.

    The grid mixes Chebyshev spacing with a geometric cluster at the left
    end, where the built-in functionals have their roughness.
    """
    fn = _as_callable(f)
    if not 0.0 < beta <= 1.0:
        raise ConfigurationError(f"beta must lie in (0, 1], got {beta!r}")
    lo, hi = float(interval[0]), float(interval[1])
    span = hi - lo
    t = np.arange(grid_points)
    u_cheb = 0.5 * (1.0 - np.cos(np.pi * t / (grid_points - 1)))
    u_geom = np.geomspace(1e-14, 1.0, grid_points // 2)
    u = np.unique(np.concatenate([[0.0], u_cheb, u_geom]))
    x = lo + span * u
    fx = np.asarray(fn(x), dtype=float)
    dx = np.abs(x[:, None] - x[None, :])
    df = np.abs(fx[:, None] - fx[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dx > 0.0, df / dx**beta, 0.0)
    return float(np.nanmax(ratio))


def log_speed_constants(phi: Functional, ell: int = 1, grid_points: int = 4096):
    """Fit |phi^(ell)(p)| between W ln(1/p) - c' and W ln(1/p) + c.

    Returns (W, c): W is the median ratio |phi^(ell)|/ln(1/p) over the
    32 smallest grid points and c the largest positive excess over the
    fitted envelope.
    """
    p = np.geomspace(1e-12, 0.999999, grid_points)
    vals = np.abs(np.asarray(phi.deriv(ell, p), dtype=float))
    logs = np.log(1.0 / p)
    W = float(np.median(vals[:32] / logs[:32]))
    c = float(max(0.0, np.max(vals - W * logs)))
    return W, c


def fitted_bound_constants(phi: Functional, alpha: float | None = None, grid_points: int = 768):
    """Documented recipe for the composite bound's W and Wprime.

    alpha < 1: twice the squared alpha-Hoelder norm of phi on [0,1].
    alpha = 1: 2 (W1 + c1)^2 from the logarithmic first-derivative fit.
    alpha in (1,2): twice the squared Lipschitz norm.  Wprime reuses W,
    which matches its role as a same-order correction scale.
    """
    if alpha is None:
        alpha = phi.alpha
    if not 0.0 < alpha < 2.0:
        raise ConfigurationError(f"alpha must lie in (0, 2), got {alpha!r}")
    if alpha == 1.0:
        W1, c1 = log_speed_constants(phi, 1)
        W = 2.0 * (W1 + c1) ** 2
    else:
        h = hoelder_norm(phi, min(alpha, 1.0), grid_points=grid_points)
        W = 2.0 * h * h
    return W, W


def simplex_max_power_sum(alpha: float, k: int):
    """Numeric max of sum p_i^alpha over the k-simplex.

    Stationarity of a separable objective with strictly monotone
    marginal derivative forces all positive coordinates to one common
    level, so the candidates are uniform on each support size; the
    helper enumerates them.  Returns (value, maximizer).
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if alpha <= 0 or alpha == 1.0:
        raise ConfigurationError(f"alpha must be positive and != 1, got {alpha!r}")
    best_val = -np.inf
    best_m = 1
    for m in range(1, k + 1):
        val = m ** (1.0 - alpha)
        if val > best_val:
            best_val = val
            best_m = m
    p = np.zeros(k)
    p[:best_m] = 1.0 / best_m
    return float(best_val), p


def simplex_max_p_log2p(k: int):
    """Numeric max of sum p_i ln^2 p_i over the k-simplex.

    The marginal derivative ln^2 p + 2 ln p takes each value at most
    twice, so stationary points have at most two positive levels
    p+ = e^(s-1), p- = e^(-s-1) (product e^-2).  The helper enumerates
    support sizes and level splits, solving the mass constraint for s
    by bracketing.  Returns (value, maximizer).
    """
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")

    def objective(levels, counts):
        return math.fsum(c * lv * math.log(lv) ** 2 for lv, c in zip(levels, counts))

    best_val = -np.inf
    best_p = None
    for kk in range(2, k + 1):
        # single-level candidate: uniform on kk symbols
        val = objective([1.0 / kk], [kk])
        if val > best_val:
            best_val = val
            best_p = np.concatenate([np.full(kk, 1.0 / kk), np.zeros(k - kk)])
        for m in range(1, kk):

            def mass(s, m=m, kk=kk):
                return m * math.exp(s - 1.0) + (kk - m) * math.exp(-s - 1.0) - 1.0

            # p+ <= 1 caps s at 1; scan for sign changes and refine
            ss = np.linspace(0.0, 1.0, 201)
            vals = np.array([mass(s) for s in ss])
            for i in range(len(ss) - 1):
                if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
                    s = brentq(mass, ss[i], ss[i + 1], xtol=1e-15)
                    if s <= 1e-12:
                        continue
                    hi_lv = math.exp(s - 1.0)
                    lo_lv = math.exp(-s - 1.0)
                    val = objective([hi_lv, lo_lv], [m, kk - m])
                    if val > best_val:
                        best_val = val
                        best_p = np.concatenate(
                            [np.full(m, hi_lv), np.full(kk - m, lo_lv), np.zeros(k - kk)]
                        )
    return float(best_val), best_p
