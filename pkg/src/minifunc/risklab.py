"""Monte Carlo risk evaluation over test distribution families.

monte_carlo_risk runs independent sample-then-estimate cycles against a
fixed distribution and reports bias, variance, and MSE with jackknife
standard errors.  rate_sweep strings those reports across an n-grid with
an alphabet-size rule and fits log-log slopes, next to a closed-form
rate oracle keyed on the divergence-speed exponent.  Every random draw
is seeded from (master_seed, n, k, estimator index, rep), so results
are reproducible bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MinifuncError
from .estimators import (
    EstimatorConfig,
    composite_estimate,
    corrected_plugin_estimate,
    plain_plugin_estimate,
    sample_histogram,
    tuned_config,
)
from .functionals import Functional, additive_functional

__all__ = [
    "DistributionSpec",
    "RiskReport",
    "SweepRow",
    "SweepResult",
    "ESTIMATORS",
    "monte_carlo_risk",
    "theoretical_rate",
    "parse_k_rule",
    "rate_sweep",
]

_FAMILIES = ("uniform", "zipf", "two_spike", "dirichlet")
_DEFAULT_PARAM = {"zipf": 1.0, "two_spike": 0.5, "dirichlet": 1.0}

# registry order is part of the seeding contract: the estimator's index
# feeds the per-rep seed tuple
ESTIMATORS = ("plugin", "corrected", "composite")

_DIST_SEED_TAG = 987654321


@dataclass(frozen=True)
class DistributionSpec:
    """A named distribution on k symbols.

    uniform ignores param; zipf uses it as the exponent s (default 1);
    two_spike puts mass param on symbol 0 and the rest on symbol 1
    (default 1/2); dirichlet draws a random simplex point with
    concentration param (default 1) from the rng handed to
    probability_vector.
    """

    family: str
    k: int
    param: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigurationError(
                f"family must be one of {_FAMILIES}, got {self.family!r}"
            )
        if self.k < 1:
            raise ConfigurationError(f"alphabet size must be >= 1, got {self.k}")
        if self.family == "two_spike":
            if self.k < 2:
                raise ConfigurationError("two_spike needs k >= 2")
            p = self._param()
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"two_spike mass must lie in [0, 1], got {p!r}")
        elif self.family in ("zipf", "dirichlet"):
            if not self._param() > 0:
                raise ConfigurationError(
                    f"{self.family} parameter must be positive, got {self._param()!r}"
                )

    def _param(self) -> float:
        if self.param is not None:
            return float(self.param)
        return _DEFAULT_PARAM.get(self.family, 0.0)

    @property
    def label(self) -> str:
        if self.family == "uniform":
            return "uniform"
        return f"{self.family}({self._param():g})"

    def probability_vector(self, rng=None) -> np.ndarray:
        if self.family == "uniform":
            p = np.full(self.k, 1.0 / self.k)
        elif self.family == "zipf":
            p = 1.0 / np.arange(1.0, self.k + 1.0) ** self._param()
            p /= math.fsum(p.tolist())
        elif self.family == "two_spike":
            p = np.zeros(self.k)
            p[0] = self._param()
            p[1] = 1.0 - self._param()
        else:
            rng = np.random.default_rng(rng)
            p = rng.dirichlet(np.full(self.k, self._param()))
            p = p / math.fsum(p.tolist())
        if abs(math.fsum(p.tolist()) - 1.0) > 1e-12:
            raise ConfigurationError(
                f"{self.label} vector left the simplex: sum={math.fsum(p.tolist())!r}"
            )
        return p


@dataclass(frozen=True)
class RiskReport:
    """Bias, variance, and MSE of one estimator at one (P, n).

    mse always equals bias^2 + variance up to rounding; construction
    re-checks that identity and refuses to produce an inconsistent
    report.  The se_* fields are leave-one-out jackknife standard
    errors of the matching statistic.
    """

    estimator: str
    estimates: np.ndarray
    bias: float
    variance: float
    mse: float
    reps: int
    theta_true: float
    se_bias: float = 0.0
    se_variance: float = 0.0
    se_mse: float = 0.0

    def __post_init__(self):
        estimates = np.asarray(self.estimates, dtype=float)
        if estimates.size != self.reps:
            raise ConfigurationError(
                f"got {estimates.size} estimates for reps={self.reps}"
            )
        scale = max(abs(self.mse), self.bias**2 + self.variance, 1.0e-30)
        gap = abs(self.mse - (self.bias**2 + self.variance))
        if gap > 1e-10 * scale:
            raise ConfigurationError(
                f"bias-variance identity violated: mse={self.mse!r} vs "
                f"bias^2+var={self.bias**2 + self.variance!r}"
            )
        estimates.flags.writeable = False
        object.__setattr__(self, "estimates", estimates)


def _dispatch(estimator: str, h, phi: Functional, cfg: EstimatorConfig, rng) -> float:
    if estimator == "plugin":
        return plain_plugin_estimate(h, phi)
    if estimator == "corrected":
        return corrected_plugin_estimate(h, phi, cfg)
    return composite_estimate(h, phi, cfg, rng=rng).estimate


def _default_cfg(phi: Functional) -> EstimatorConfig:
    alpha = phi.alpha if phi.alpha is not None else 1.0
    return tuned_config(alpha)


def _jackknife_ses(estimates: np.ndarray, theta: float) -> tuple[float, float, float]:
    R = estimates.size
    if R < 2:
        return (0.0, 0.0, 0.0)
    S = math.fsum(estimates.tolist())
    sq = (estimates - theta) ** 2
    Q = math.fsum(sq.tolist())
    loo_mean = (S - estimates) / (R - 1)
    loo_bias = loo_mean - theta
    loo_mse = (Q - sq) / (R - 1)
    loo_var = loo_mse - loo_bias**2

    def se(loo: np.ndarray) -> float:
        centered = loo - loo.mean()
        return math.sqrt((R - 1) / R * float(np.dot(centered, centered)))

    return (se(loo_bias), se(loo_var), se(loo_mse))


def monte_carlo_risk(
    spec: DistributionSpec,
    phi: Functional,
    estimator: str,
    n: int,
    reps: int = 1000,
    master_seed: int = 0,
    model: str = "multinomial",
    cfg: EstimatorConfig | None = None,
    jobs: int = 1,
) -> RiskReport:
    """Estimate E[(theta_hat - theta)^2] at one distribution by simulation.

    Each rep draws a fresh histogram and runs the named estimator
    ('plugin', 'corrected', or 'composite'); rep r is seeded from
    (master_seed, n, k, estimator index, r), so a longer run extends a
    shorter one sample-for-sample and the worker count never changes
    the output.  Estimator failures are re-raised with the rep index.
    """
    if estimator not in ESTIMATORS:
        raise ConfigurationError(
            f"estimator must be one of {ESTIMATORS}, got {estimator!r}"
        )
    if reps < 100:
        raise ConfigurationError(f"reps must be >= 100, got {reps}")
    if n < 1:
        raise ConfigurationError(f"sample size must be >= 1, got {n}")
    if master_seed < 0:
        raise ConfigurationError(f"master_seed must be >= 0, got {master_seed}")
    if jobs < 1:
        raise ConfigurationError(f"jobs must be >= 1, got {jobs}")
    cfg = cfg if cfg is not None else _default_cfg(phi)
    est_idx = ESTIMATORS.index(estimator)

    dist_rng = np.random.default_rng(
        np.random.SeedSequence((master_seed, spec.k, _DIST_SEED_TAG))
    )
    P = spec.probability_vector(rng=dist_rng)
    theta = additive_functional(P, phi)

    estimates = np.empty(reps, dtype=float)

    def run_rep(r: int) -> None:
        rng = np.random.default_rng(
            np.random.SeedSequence((master_seed, n, spec.k, est_idx, r))
        )
        h = sample_histogram(P, n, model=model, rng=rng)
        try:
            estimates[r] = _dispatch(estimator, h, phi, cfg, rng)
        except MinifuncError as e:
            raise type(e)(
                f"estimator {estimator!r} failed at rep {r}: {e}"
            ) from e

    if jobs == 1:
        for r in range(reps):
            run_rep(r)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for fut in [pool.submit(run_rep, r) for r in range(reps)]:
                fut.result()

    mean = math.fsum(estimates.tolist()) / reps
    bias = mean - theta
    mse = math.fsum(((estimates - theta) ** 2).tolist()) / reps
    variance = math.fsum(((estimates - mean) ** 2).tolist()) / reps
    se_bias, se_variance, se_mse = _jackknife_ses(estimates, theta)
    return RiskReport(
        estimator=estimator,
        estimates=estimates,
        bias=bias,
        variance=variance,
        mse=mse,
        reps=reps,
        theta_true=theta,
        se_bias=se_bias,
        se_variance=se_variance,
        se_mse=se_mse,
    )


def theoretical_rate(alpha: float, n: int, k: int) -> float:
    """Minimax-rate expression by exponent branch, constants dropped.

    (0,1/2]: k^2/(n ln n)^{2a};  (1/2,1): + k^{2-2a}/n;
    1: k^2/(n ln n)^2 + ln^2(k)/n;  (1,3/2): + 1/n;  [3/2,2]: 1/n.
    """
    if alpha <= 0:
        raise ConfigurationError(
            f"no consistent estimator exists for alpha={alpha!r} <= 0; "
            "the rate is undefined there"
        )
    if alpha > 2:
        raise ConfigurationError(f"rate defined for alpha in (0, 2], got {alpha!r}")
    if n < 2:
        raise ConfigurationError(f"rate needs n >= 2, got {n}")
    if k < 1:
        raise ConfigurationError(f"rate needs k >= 1, got {k}")
    nl = n * math.log(n)
    main = k**2 / nl ** (2.0 * alpha)
    if alpha <= 0.5:
        return main
    if alpha < 1.0:
        return main + k ** (2.0 - 2.0 * alpha) / n
    if alpha == 1.0:
        return main + math.log(k) ** 2 / n
    if alpha < 1.5:
        return main + 1.0 / n
    return 1.0 / n


def parse_k_rule(rule: str):
    """Alphabet-size rule for sweeps: 'n', 'sqrt', or 'fixed:<int>'."""
    if rule == "n":
        return lambda n: int(n)
    if rule == "sqrt":
        return lambda n: max(1, int(math.isqrt(int(n))))
    if rule.startswith("fixed:"):
        try:
            k = int(rule.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad k rule {rule!r}") from None
        if k < 1:
            raise ConfigurationError(f"fixed alphabet size must be >= 1, got {k}")
        return lambda n: k
    raise ConfigurationError(
        f"k rule must be 'n', 'sqrt', or 'fixed:<int>', got {rule!r}"
    )


@dataclass(frozen=True)
class SweepRow:
    family: str
    k: int
    n: int
    estimator: str
    bias: float
    var: float
    mse: float
    se: float
    theory_rate: float


@dataclass(frozen=True)
class SweepResult:
    """Rows of a rate sweep plus fitted log-log slopes.

    slopes maps each estimator to the least-squares slope of log MSE
    against log n; theory_slope is the same fit applied to the rate
    oracle on the identical (n, k) grid.  Rows appear in (n ascending,
    estimator order given) order; to_csv renders them with repr-exact
    floats so equal results serialize to identical bytes.
    """

    rows: tuple = field(default_factory=tuple)
    reports: tuple = field(default_factory=tuple)
    slopes: dict = field(default_factory=dict)
    theory_slope: float = math.nan

    def to_csv(self) -> str:
        lines = ["family,k,n,estimator,bias,var,mse,se,theory_rate"]
        for row in self.rows:
            lines.append(
                f"{row.family},{row.k},{row.n},{row.estimator},"
                f"{row.bias!r},{row.var!r},{row.mse!r},{row.se!r},{row.theory_rate!r}"
            )
        return "\n".join(lines) + "\n"


def _log_slope(ns, values) -> float:
    vals = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(vals), 1)[0])


def rate_sweep(
    family: str,
    phi: Functional,
    estimators,
    n_grid,
    k_rule: str = "n",
    reps: int = 1000,
    param: float | None = None,
    master_seed: int = 0,
    model: str = "multinomial",
    cfg: EstimatorConfig | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Monte Carlo risk across an n-grid with k tied to n by k_rule.

    Requires at least 4 grid points spanning a decade so the log-log
    slope fit means something.  The theory column uses phi's exponent
    when it has one and NaN otherwise.
    """
    ns = sorted(int(n) for n in n_grid)
    if len(ns) < 4:
        raise ConfigurationError(f"n_grid needs >= 4 points, got {len(ns)}")
    if ns[0] < 2:
        raise ConfigurationError(f"n_grid values must be >= 2, got {ns[0]}")
    if ns[-1] < 10 * ns[0]:
        raise ConfigurationError(
            f"n_grid must span at least one decade, got [{ns[0]}, {ns[-1]}]"
        )
    estimators = list(estimators)
    for est in estimators:
        if est not in ESTIMATORS:
            raise ConfigurationError(
                f"estimator must be one of {ESTIMATORS}, got {est!r}"
            )
    k_of = parse_k_rule(k_rule)

    rows = []
    reports = []
    for n in ns:
        k = k_of(n)
        spec = DistributionSpec(family=family, k=k, param=param)
        for est in estimators:
            report = monte_carlo_risk(
                spec,
                phi,
                est,
                n,
                reps=reps,
                master_seed=master_seed,
                model=model,
                cfg=cfg,
                jobs=jobs,
            )
            if phi.alpha is not None:
                theory = theoretical_rate(phi.alpha, n, k)
            else:
                theory = math.nan
            rows.append(
                SweepRow(
                    family=spec.label,
                    k=k,
                    n=n,
                    estimator=est,
                    bias=report.bias,
                    var=report.variance,
                    mse=report.mse,
                    se=report.se_mse,
                    theory_rate=theory,
                )
            )
            reports.append(report)

    slopes = {
        est: _log_slope(ns, [r.mse for r in rows if r.estimator == est])
        for est in estimators
    }
    theory_slope = _log_slope(
        ns, [r.theory_rate for r in rows if r.estimator == estimators[0]]
    )
    return SweepResult(
        rows=tuple(rows),
        reports=tuple(reports),
        slopes=slopes,
        theory_slope=theory_slope,
    )
