"""Exact logarithmic-measure distribution of phi(y) = e^{-y/2k} S_f(e^y).

S_f is piecewise constant, so on each step interval phi is a monotone
exponential arc and every Lebesgue-in-y integral reduces to closed form:
bin masses, moments, the quadratic mean in dx/x, and exceedance measures
are all computed without sampling error on the finite window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .explicit import coefficient_decay_fit
from .kfree import SieveRangeError, StepSeries


@dataclass
class EmpiricalDistribution:
    """Binned distribution of phi under dy/(Y - y0), plus closed-form
    moments that are exact (independent of the binning)."""

    edges: np.ndarray
    masses: np.ndarray
    support: tuple[float, float]
    y_measure: float
    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def cdf(self, v) -> np.ndarray:
        """Piecewise-linear CDF (mass uniform within each bin)."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        idx = np.clip(np.searchsorted(self.edges, v, side="right") - 1, -1, len(self.masses))
        out = np.empty_like(v)
        below = idx < 0
        above = idx >= len(self.masses)
        mid = ~below & ~above
        out[below] = 0.0
        out[above] = 1.0
        i = idx[mid]
        w = self.edges[i + 1] - self.edges[i]
        frac = np.where(w > 0, (v[mid] - self.edges[i]) / np.where(w > 0, w, 1.0), 1.0)
        out[mid] = cum[i] + self.masses[i] * frac
        return out

    def binned_moment(self, order: int) -> float:
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        return float(np.sum(self.masses * mid**order))


def _pieces(series: StepSeries, y0: float, Y: float):
    """Constant-S pieces of [y0, Y]: boundaries ys (len m+1) and values."""
    if Y <= y0 or y0 < 0.0:
        raise ValueError("need 0 <= y0 < Y")
    if math.floor(math.exp(Y)) > series.limit:
        raise SieveRangeError("window end beyond the sieved range")
    pos = series.positions
    x0 = math.exp(y0)
    start_val = series.value(x0)
    sel = (pos > x0) & (np.log(pos) < Y)
    ys = np.concatenate([[y0], np.log(pos[sel]), [Y]])
    svals = np.concatenate([[start_val], series.sums[sel]]).astype(float)
    return ys, svals


def exact_log_distribution(
    series: StepSeries,
    k: int,
    y0: float = math.log(2.0),
    Y: float = None,
    bins: int = 201,
) -> EmpiricalDistribution:
    """Exact distribution of phi over [y0, Y]: each monotone arc's y-measure
    is split over the bins by inverting phi in closed form."""
    if Y is None:
        Y = math.log(series.limit)
    ys, svals = _pieces(series, y0, Y)
    twok = 2.0 * k
    a = svals * np.exp(-ys[:-1] / twok)  # phi at piece start
    b = svals * np.exp(-ys[1:] / twok)  # phi at piece end (smaller modulus)
    lengths = np.diff(ys)

    lo_val = min(float(np.min(a)), float(np.min(b)), 0.0)
    hi_val = max(float(np.max(a)), float(np.max(b)), 0.0)
    pad = 1e-9 * max(hi_val - lo_val, 1e-30)
    if np.isscalar(bins):
        edges = np.linspace(lo_val - pad, hi_val + pad, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges[0] > lo_val or edges[-1] < hi_val:
            raise ValueError("explicit bin edges must cover the phi support")
    nbins = len(edges) - 1
    weight = np.zeros(nbins)

    zero = svals == 0.0
    if np.any(zero):
        zbin = min(max(int(np.searchsorted(edges, 0.0, side="right") - 1), 0), nbins - 1)
        weight[zbin] += float(np.sum(lengths[zero]))

    nz = ~zero
    lo = np.minimum(a[nz], b[nz])
    hi = np.maximum(a[nz], b[nz])
    plen = lengths[nz]
    i_lo = np.clip(np.searchsorted(edges, lo, side="right") - 1, 0, nbins - 1)
    i_hi = np.clip(np.searchsorted(edges, hi, side="right") - 1, 0, nbins - 1)
    same = i_lo == i_hi
    np.add.at(weight, i_lo[same], plen[same])
    # arcs spanning several bins: split the y-measure at each crossed edge;
    # measure of |phi| in [u, v] on one arc is 2k log(v/u)
    for j in np.nonzero(~same)[0]:
        u, v, il, ih = lo[j], hi[j], int(i_lo[j]), int(i_hi[j])
        labs_lo, labs_hi = math.log(abs(u)), math.log(abs(v))
        total = labs_hi - labs_lo
        for bidx in range(il, ih + 1):
            seg_lo = max(u, edges[bidx]) if bidx > il else u
            seg_hi = min(v, edges[bidx + 1]) if bidx < ih else v
            if seg_hi <= seg_lo:
                continue
            frac = (math.log(abs(seg_hi)) - math.log(abs(seg_lo))) / total
            weight[bidx] += plen[j] * frac

    total_measure = float(np.sum(lengths))
    masses = weight / math.fsum(weight)
    mean = twok * math.fsum(svals * (np.exp(-ys[:-1] / twok) - np.exp(-ys[1:] / twok)))
    second = k * math.fsum(svals**2 * (np.exp(-ys[:-1] / k) - np.exp(-ys[1:] / k)))
    return EmpiricalDistribution(
        edges=edges,
        masses=masses,
        support=(float(lo_val), float(hi_val)),
        y_measure=total_measure,
        mean=mean / total_measure,
        second_moment=second / total_measure,
    )


def ks_distance(d1: EmpiricalDistribution, d2: EmpiricalDistribution) -> float:
    """sup |CDF1 - CDF2| over the union of both edge sets (the difference is
    piecewise linear, so the sup is attained at a vertex)."""
    grid = np.union1d(d1.edges, d2.edges)
    return float(np.max(np.abs(d1.cdf(grid) - d2.cdf(grid))))


def variance_integral(series: StepSeries, k: int, X: float) -> float:
    """int_2^X (S_f(x) / x^{1/2k})^2 dx/x, exact per step interval:
    S^2 int x^{-1-1/k} dx = S^2 k (u^{-1/k} - v^{-1/k})."""
    if X <= 2.0:
        raise ValueError("X must exceed 2")
    if X > series.limit:
        raise SieveRangeError("X beyond the sieved range")
    pos = series.positions.astype(float)
    sel = (pos > 2.0) & (pos < X)
    xs = np.concatenate([[2.0], pos[sel], [X]])
    sv = np.concatenate([[series.value(2.0)], series.sums[sel]]).astype(float)
    return float(k * math.fsum(sv**2 * (xs[:-1] ** (-1.0 / k) - xs[1:] ** (-1.0 / k))))


@dataclass(frozen=True)
class BetaKEstimate:
    gammas: np.ndarray
    partial_sums: np.ndarray  # running 2 sum |c|^2 in gamma order
    partial: float
    tail_estimate: float  # mean-square amplitude at the predicted decay
    tail_bound: float  # envelope amplitude at the predicted decay
    estimate: float  # partial + tail_estimate
    upper: float  # partial + tail_bound
    amplitude_rms: float
    amplitude_envelope: float
    decay_exponent: float  # theory value 1/2 + 1/(2k)
    decay_exponent_fit: float  # unconstrained log-log fit, for diagnostics
    converged: bool


def _density_tail_integral(T: float, two_beta: float, q: float) -> float:
    """int_T^inf u^{-2 beta} dN(u) with the one-sided zero density
    (1/2pi) log(qu/2pi) du (the same normalization fits zeta and L)."""
    p = two_beta - 1.0
    c0 = 2.0 * math.pi / q
    return T ** (-p) * (math.log(T / c0) / p + 1.0 / p**2) / (2.0 * math.pi)


def beta_k(terms, k: int, density_modulus: int = 1) -> BetaKEstimate:
    """Running partial sums of 2 sum |c_rho|^2 with the tail extrapolated
    at the predicted decay |c| ~ A gamma^{-(1/2 + 1/2k)}.

    Two amplitudes are fitted: the mean-square A (point estimate of the
    tail) and the envelope A bounding every |c| gamma^{1/2+1/2k} in the
    catalog (tail bound); the estimate is reported as value + bracket,
    never as ground truth.
    """
    if not terms:
        return BetaKEstimate(
            gammas=np.empty(0), partial_sums=np.empty(0), partial=0.0,
            tail_estimate=0.0, tail_bound=0.0, estimate=0.0, upper=0.0,
            amplitude_rms=0.0, amplitude_envelope=0.0,
            decay_exponent=0.5 + 0.5 / k, decay_exponent_fit=float("nan"),
            converged=False,
        )
    g = np.array([t.gamma for t in terms])
    mags = np.array([abs(t.coeff) for t in terms])
    run = 2.0 * np.cumsum(mags**2)
    partial = float(run[-1])
    beta_th = 0.5 + 0.5 / k
    scaled = mags * g**beta_th
    A_env = float(np.max(scaled))
    top = g >= np.median(g)  # fit the asymptotic amplitude on the upper half
    A_rms = float(np.sqrt(np.mean(scaled[top] ** 2)))
    fit_beta = coefficient_decay_fit(terms)[1] if len(terms) >= 4 else float("nan")
    T = float(g[-1])
    integral = _density_tail_integral(T, 2.0 * beta_th, float(density_modulus))
    tail_est = 2.0 * A_rms**2 * integral
    tail_bnd = 2.0 * A_env**2 * integral
    return BetaKEstimate(
        gammas=g, partial_sums=run, partial=partial,
        tail_estimate=tail_est, tail_bound=tail_bnd,
        estimate=partial + tail_est, upper=partial + tail_bnd,
        amplitude_rms=A_rms, amplitude_envelope=A_env,
        decay_exponent=beta_th, decay_exponent_fit=float(fit_beta),
        converged=bool(2.0 * beta_th > 1.0),
    )


@dataclass(frozen=True)
class GrowthReport:
    sup_ratio: float
    argmax_x: float
    exceedance_log_measure: float
    threshold: float
    epsilon: float


def growth_envelope(
    series: StepSeries, k: int, C_tilde: float, eps: float, X: float
) -> GrowthReport:
    """sup of |S_f(x)| / (x^{1/2k} (log x)^{1/2+eps}) over [e^2, X] and the
    exact logarithmic measure of {x : |S_f(x)| >= C_tilde * envelope(x)}."""
    lo_x = math.exp(2.0)
    if X <= lo_x:
        raise ValueError("X must exceed e^2")
    if X > series.limit:
        raise SieveRangeError("X beyond the sieved range")
    pos = series.positions.astype(float)
    sel = (pos > lo_x) & (pos < X)
    xs = np.concatenate([[lo_x], pos[sel], [X]])
    sv = np.abs(np.concatenate([[series.value(lo_x)], series.sums[sel]]).astype(float))
    u, v = xs[:-1], xs[1:]

    def env(x):
        return x ** (1.0 / (2.0 * k)) * np.log(x) ** (0.5 + eps)

    ratios = sv / env(u)  # envelope increases, so the sup sits at the left end
    imax = int(np.argmax(ratios))
    sup_ratio = float(ratios[imax])
    argmax_x = float(u[imax])

    if C_tilde == 0.0:
        measure = math.log(X) - 2.0
    elif math.isinf(C_tilde):
        measure = 0.0
    else:
        g_u = C_tilde * env(u)
        g_v = C_tilde * env(v)
        full = sv >= g_v
        partial = (~full) & (sv >= g_u)
        measure = float(np.sum(np.log(v[full] / u[full])))
        if np.any(partial):
            # solve C * env(x*) = |S| by bisection on each boundary arc
            lo_b = u[partial].copy()
            hi_b = v[partial].copy()
            target = sv[partial]
            for _ in range(60):
                mid = 0.5 * (lo_b + hi_b)
                high = C_tilde * env(mid) > target
                hi_b = np.where(high, mid, hi_b)
                lo_b = np.where(high, lo_b, mid)
            measure += float(np.sum(np.log(0.5 * (lo_b + hi_b) / u[partial])))
    return GrowthReport(
        sup_ratio=sup_ratio, argmax_x=argmax_x,
        exceedance_log_measure=measure, threshold=C_tilde, epsilon=eps,
    )


def conjecture_normalizer(x: float, k: int) -> float:
    """x^{1/2k} (log log x)^{1/2 - 1/2k} (log log log x)^{1/4k}; the triple
    logarithm needs log log x > 1, so x must exceed e^e (enforced as 16)."""
    if x <= 16.0:
        raise ValueError("normalizer needs x > 16 (triple logarithm domain)")
    ll = math.log(math.log(x))
    lll = math.log(ll)
    return (
        x ** (1.0 / (2.0 * k))
        * ll ** (0.5 - 1.0 / (2.0 * k))
        * lll ** (1.0 / (4.0 * k))
    )


@dataclass(frozen=True)
class NormalizerSweep:
    x: np.ndarray
    running_max: np.ndarray  # of S_f(x) / normalizer
    running_min: np.ndarray
    final_max: float
    final_min: float


def normalizer_sweep(series: StepSeries, k: int, X: float | None = None) -> NormalizerSweep:
    """Running extrema of S_f(x) / normalizer over jump positions > 16."""
    X = float(series.limit) if X is None else X
    pos = series.positions.astype(float)
    sel = (pos > 16.0) & (pos <= X)
    xs = pos[sel]
    sv = series.sums[sel].astype(float)
    if xs.size == 0:
        raise ValueError("no jump positions above the normalizer domain")
    ll = np.log(np.log(xs))
    norm = xs ** (1.0 / (2.0 * k)) * ll ** (0.5 - 1.0 / (2.0 * k)) * np.log(ll) ** (
        1.0 / (4.0 * k)
    )
    ratio = sv / norm
    rmax = np.maximum.accumulate(ratio)
    rmin = np.minimum.accumulate(ratio)
    return NormalizerSweep(
        x=xs, running_max=rmax, running_min=rmin,
        final_max=float(rmax[-1]), final_min=float(rmin[-1]),
    )
