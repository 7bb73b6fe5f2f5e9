"""Random model on the torus: X(theta) = sum r_gamma sin(2 pi theta_gamma).

Amplitudes are twice the moduli of the explicit-formula coefficients; the
characteristic function of X is the product of J0(xi r_gamma) over the
stored terms, with a log-attenuation estimate for the unstored tail.
Sampling uses a counter-based generator so any run is reproducible from its
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import EmpiricalDistribution
from .special import bessel_j0

_SAMPLE_BLOCK = 65536


@dataclass(frozen=True)
class ModelAmplitudes:
    """Positive amplitudes sorted descending (the head/tail split of the
    tail-sandwich bounds is tightest that way), the truncation height, and
    an estimate of the unstored sum of squares."""

    r: np.ndarray
    truncation: float
    tail_sq: float
    provenance: str = "unspecified"

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("amplitudes must be positive")
        if self.tail_sq < 0:
            raise ValueError("tail estimate must be non-negative")
        object.__setattr__(self, "r", np.sort(r)[::-1])

    @staticmethod
    def from_terms(terms, T: float, tail_sq: float = 0.0) -> "ModelAmplitudes":
        r = np.array([2.0 * abs(t.coeff) for t in terms if t.gamma <= T])
        return ModelAmplitudes(
            r=r, truncation=T, tail_sq=float(tail_sq),
            provenance=f"2|c_rho| for gamma <= {T}",
        )

    @property
    def variance(self) -> float:
        """Variance of the truncated model: sum r^2 / 2."""
        return float(np.sum(self.r**2) / 2.0)

    def tail_log_attenuation(self, xi: float) -> float:
        """log of the estimated unstored factor of the characteristic
        function: J0(z) ~ e^{-z^2/4} for small z termwise."""
        return -(xi**2) * self.tail_sq / 4.0


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def sample_x(amps: ModelAmplitudes, count: int, seed: int = 0) -> np.ndarray:
    """count independent draws of the truncated X(theta)."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = _rng(seed)
    n = len(amps.r)
    out = np.empty(count)
    done = 0
    while done < count:
        m = min(_SAMPLE_BLOCK, count - done)
        theta = rng.random((m, n))
        out[done : done + m] = np.sin(2.0 * math.pi * theta) @ amps.r
        done += m
    return out


def fourier_nu(amps: ModelAmplitudes, xi: float) -> float:
    """Truncated characteristic-function product prod J0(xi r); the
    unstored factor is available as exp(tail_log_attenuation(xi))."""
    if xi == 0.0:
        return 1.0
    return float(np.prod(bessel_j0(xi * amps.r)))


@dataclass(frozen=True)
class MontgomeryBounds:
    K: int
    head_sum: float
    tail_sq: float
    upper_threshold: float  # P(X >= 2 head) <= upper_bound
    upper_bound: float
    lower_threshold: float  # P(X >= head/2) >= lower_bound
    lower_bound: float
    underflow: bool


def montgomery_bounds(amps: ModelAmplitudes, K: int) -> MontgomeryBounds:
    """Tail sandwich from the K largest amplitudes: exp(-3/4 H^2/tail) above
    2H and 2^{-40} exp(-100 H^2/tail) below H/2, H the head sum."""
    if not 1 <= K <= len(amps.r):
        raise ValueError(f"K must lie in [1, {len(amps.r)}]")
    head = float(np.sum(amps.r[:K]))
    tail = float(np.sum(amps.r[K:] ** 2)) + amps.tail_sq
    if tail == 0.0:
        return MontgomeryBounds(
            K=K, head_sum=head, tail_sq=0.0,
            upper_threshold=2.0 * head, upper_bound=0.0,
            lower_threshold=0.5 * head, lower_bound=0.0, underflow=True,
        )
    ratio = head * head / tail
    return MontgomeryBounds(
        K=K, head_sum=head, tail_sq=tail,
        upper_threshold=2.0 * head,
        upper_bound=math.exp(-0.75 * ratio) if 0.75 * ratio < 745 else 0.0,
        lower_threshold=0.5 * head,
        lower_bound=2.0**-40 * math.exp(-100.0 * ratio) if 100.0 * ratio < 700 else 0.0,
        underflow=False,
    )


@dataclass(frozen=True)
class TailEstimate:
    V: float
    probability: float
    std_error: float
    count: int


def tail_probability(
    amps: ModelAmplitudes, V: float, count: int, seed: int = 0,
    samples: np.ndarray | None = None,
) -> TailEstimate:
    """Monte Carlo estimate of P(X >= V) with its binomial standard error.
    Pass precomputed samples to amortize across a V grid."""
    if count < 10_000:
        raise ValueError("tail estimation needs at least 10^4 samples")
    x = samples if samples is not None else sample_x(amps, count, seed)
    p = float(np.mean(x >= V))
    se = math.sqrt(max(p * (1.0 - p), 1.0 / count) / count)
    return TailEstimate(V=V, probability=p, std_error=se, count=count)


@dataclass(frozen=True)
class DeviationFit:
    exponent_axis: float  # V is raised to 2k/(k-1)
    slope: float
    intercept: float
    r_squared: float
    used_V: np.ndarray
    probabilities: np.ndarray
    degenerate: bool
    caveat: str = "consistency probe, not asymptotics"


def large_deviation_fit(
    amps: ModelAmplitudes, k: int, V_grid, count: int, seed: int = 0
) -> DeviationFit:
    """Regress -log P(X >= V) on V^{2k/(k-1)} over the MC-resolvable part
    of the grid (P >= 10/count)."""
    expo = 2.0 * k / (k - 1.0)
    x = sample_x(amps, count, seed)
    V_grid = np.asarray(V_grid, dtype=float)
    probs = np.array([np.mean(x >= V) for V in V_grid])
    ok = probs >= 10.0 / count
    if ok.sum() < 2 or np.all(probs[ok] == probs[ok][0]):
        return DeviationFit(
            exponent_axis=expo, slope=float("nan"), intercept=float("nan"),
            r_squared=0.0, used_V=V_grid[ok], probabilities=probs,
            degenerate=True,
        )
    u = V_grid[ok] ** expo
    w = -np.log(probs[ok])
    coef = np.polyfit(u, w, 1)
    pred = np.polyval(coef, u)
    ss_res = float(np.sum((w - pred) ** 2))
    ss_tot = float(np.sum((w - np.mean(w)) ** 2))
    return DeviationFit(
        exponent_axis=expo, slope=float(coef[0]), intercept=float(coef[1]),
        r_squared=1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0,
        used_V=V_grid[ok], probabilities=probs, degenerate=False,
    )


@dataclass(frozen=True)
class ModelComparison:
    ks: float
    mean_empirical: float
    mean_model: float
    variance_empirical: float
    variance_model: float
    kurtosis_empirical: float
    kurtosis_model: float
    count: int


def empirical_vs_model(
    dist: EmpiricalDistribution, amps: ModelAmplitudes, count: int, seed: int = 0
) -> ModelComparison:
    """KS distance between the exact phi distribution and the MC law of X,
    plus moment comparisons (model variance is sum r^2/2 by construction)."""
    x = sample_x(amps, count, seed)
    xs = np.sort(x)
    grid = np.union1d(dist.edges, xs[:: max(1, len(xs) // 4096)])
    F_mc = np.searchsorted(xs, grid, side="right") / len(xs)
    ks = float(np.max(np.abs(dist.cdf(grid) - F_mc)))
    mu = float(np.mean(x))
    var = float(np.var(x))
    kur = float(np.mean((x - mu) ** 4) / var**2) if var > 0 else float("nan")
    dvar = dist.variance
    dm4 = dist.binned_moment(4) - 4 * dist.mean * dist.binned_moment(3) \
        + 6 * dist.mean**2 * dist.binned_moment(2) - 3 * dist.mean**4
    return ModelComparison(
        ks=ks,
        mean_empirical=dist.mean,
        mean_model=mu,
        variance_empirical=dvar,
        variance_model=var,
        kurtosis_empirical=float(dm4 / dvar**2) if dvar > 0 else float("nan"),
        kurtosis_model=kur,
        count=count,
    )
