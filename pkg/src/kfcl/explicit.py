"""Assembly and evaluation of the zero-sum expansion of S_f(x).

Each catalog zero rho = 1/2 + i gamma contributes one coefficient
c_rho = L(rho/k, chi) Z_f(rho) / rho, where Z_f dispatches on the parity
of k and on whether the summand carries the modified character:

    k even, plain      P(rho)   / zeta'(rho)
    k odd,  plain      1        / L'(rho, chi)
    k even, modified   P(rho/k) / zeta'(rho)
    k odd,  modified   P(rho/k) / (L'(rho, chi) P(rho))

with P the finite Euler product over primes dividing the modulus.  The
expansion sums 2 Re(c_rho x^{rho/k}) over positive ordinates; x^{rho/k} is
taken on the principal branch, which is forced for real x > 1.  The module
also evaluates the truncated vertical-line (Perron) integral of the
generating series and the short-window mean square of band-limited pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .kfree import StepSeries, SummandSpec
from .special import DEFAULT_CTX, EvalContext, FiniteEulerProduct, l_batch, zeta_batch
from .zeros import MissingDerivativeError, ZeroCatalog


class CatalogMismatchError(ValueError):
    """Catalog function does not match the summand's parity rule."""


@dataclass(frozen=True)
class ResidueTerm:
    gamma: float
    coeff: complex


def _check_parity(spec: SummandSpec, catalog: ZeroCatalog) -> None:
    if spec.k % 2 == 0:
        if not catalog.is_zeta:
            raise CatalogMismatchError("even k sums over zeta zeros; got an L catalog")
    else:
        if catalog.is_zeta:
            raise CatalogMismatchError("odd k sums over L(., chi) zeros; got zeta")
        if catalog.function.values != spec.character.values:
            raise CatalogMismatchError("L catalog character differs from the summand's")


def zf_value(spec: SummandSpec, rho: complex, deriv: complex) -> complex:
    """Case dispatch for Z_f at a simple zero with known derivative."""
    if deriv is None:
        raise MissingDerivativeError(f"no derivative available at rho={rho}")
    if abs(deriv) < 1e-12:
        raise MissingDerivativeError(f"|derivative| < 1e-12 at rho={rho}")
    P = FiniteEulerProduct(spec.character.modulus)
    if spec.k % 2 == 0:
        return (P.value(rho / spec.k) if spec.modified else P.value(rho)) / deriv
    if spec.modified:
        return P.value(rho / spec.k) / (deriv * P.value(rho))
    return 1.0 / deriv


def residue_coefficients(
    spec: SummandSpec,
    catalog: ZeroCatalog,
    T: float,
    ctx: EvalContext = DEFAULT_CTX,
) -> list[ResidueTerm]:
    """One term per ordinate in (0, T]; conjugates are implicit."""
    _check_parity(spec, catalog)
    recs = catalog.upto(T)
    if not recs:
        return []
    rhos = np.array([complex(0.5, r.gamma) for r in recs])
    derivs = []
    for r in recs:
        if r.deriv is None:
            raise MissingDerivativeError(f"gamma={r.gamma} not enriched")
        derivs.append(r.deriv)
    derivs = np.array(derivs)
    lvals = l_batch(rhos / spec.k, spec.character, ctx)
    P = FiniteEulerProduct(spec.character.modulus)
    if spec.k % 2 == 0:
        pfac = P.value_batch(rhos / spec.k) if spec.modified else P.value_batch(rhos)
        z = pfac / derivs
    elif spec.modified:
        z = P.value_batch(rhos / spec.k) / (derivs * P.value_batch(rhos))
    else:
        z = 1.0 / derivs
    coeffs = lvals * z / rhos
    return [ResidueTerm(gamma=r.gamma, coeff=c) for r, c in zip(recs, coeffs)]


def explicit_sum(terms, x: float, k: int) -> float:
    """2 sum Re(c_rho x^{rho/k}) with exactly rounded accumulation, so the
    value is invariant under permutation of the terms."""
    if x < 1.0:
        raise ValueError("defined for x >= 1")
    lx = math.log(x)
    amp = math.exp(lx / (2.0 * k))
    parts = [
        (t.coeff * complex(math.cos(t.gamma * lx / k), math.sin(t.gamma * lx / k))).real
        for t in terms
    ]
    return 2.0 * amp * math.fsum(parts)


def explicit_sum_grid(terms, xs, k: int) -> np.ndarray:
    """Vectorized expansion over an x grid."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 1.0):
        raise ValueError("defined for x >= 1")
    if not terms:
        return np.zeros(xs.shape)
    g = np.array([t.gamma for t in terms])
    c = np.array([t.coeff for t in terms])
    lx = np.log(xs)
    E = np.exp(1j * np.multiply.outer(lx / k, g))
    return 2.0 * np.exp(lx / (2.0 * k)) * (E @ c).real


def residual(spec: SummandSpec, series: StepSeries, terms, x: float) -> float:
    """Empirical remainder S_f(x) minus the truncated expansion."""
    return float(series.value(x)) - explicit_sum(terms, x, spec.k)


# -- remainder envelope --------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    """Fitted positive constants for the five-term remainder envelope."""

    k: int
    eps: float
    c_const: float
    c_perron: float
    c_vert: float
    c_horiz: float
    c_tail: float

    def constants(self) -> np.ndarray:
        return np.array([self.c_const, self.c_perron, self.c_vert, self.c_horiz, self.c_tail])


def _envelope_basis(x, T, k: int, eps: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    T = np.asarray(T, dtype=float)
    lx = np.log(x)
    return np.column_stack(
        [
            np.ones_like(x),
            x * lx / T,
            x / (T ** (1.0 - eps) * lx),
            x**eps * T**eps,
            x ** (1.0 / (2.0 * k)) * np.sqrt(np.log(T)) / T**eps,
        ]
    )


def error_envelope(model: ErrorModel, x: float, T: float) -> float:
    row = _envelope_basis([x], [T], model.k, model.eps)[0]
    return float(row @ model.constants())


def fit_error_model(x_vals, T_vals, residuals, k: int, eps: float | None = None) -> ErrorModel:
    """Non-negative least squares of |residual| on the envelope basis; the
    bound hides its constants, so they are calibrated, never asserted."""
    if eps is None:
        eps = 1.0 / (4.0 * k)
    A = _envelope_basis(x_vals, T_vals, k, eps)
    b = np.abs(np.asarray(residuals, dtype=float))
    coef, _ = nnls(A, b)
    coef = np.maximum(coef, 1e-30)  # keep the envelope strictly positive
    return ErrorModel(k=k, eps=eps, c_const=coef[0], c_perron=coef[1],
                      c_vert=coef[2], c_horiz=coef[3], c_tail=coef[4])


# -- generating series and the Perron integral ---------------------------------


def generating_series(spec: SummandSpec, s, ctx: EvalContext = DEFAULT_CTX) -> np.ndarray:
    """Dirichlet series of the summand at a batch of points, assembled from
    L, zeta and the finite product according to parity and modification."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    chi = spec.character
    k = spec.k
    P = FiniteEulerProduct(chi.modulus)
    lv = l_batch(s, chi, ctx)
    if k % 2 == 0:
        zv = zeta_batch(k * s, ctx)
        pf = P.value_batch(s) if spec.modified else P.value_batch(k * s)
        return lv * pf / zv
    lden = l_batch(k * s, chi, ctx)
    if spec.modified:
        return lv * P.value_batch(s) / (lden * P.value_batch(k * s))
    return lv / lden


class QuadratureError(ArithmeticError):
    """Perron quadrature failed its self-consistency refinement."""


def perron_integral(
    spec: SummandSpec,
    x: float,
    T: float,
    sigma0: float | None = None,
    ctx: EvalContext | None = None,
    nodes_per_period: float = 10.0,
    check: bool = False,
) -> float:
    """Principal value of the truncated vertical-line integral
    (1/2 pi i) int F(s) x^s / s ds over Re s = sigma0, |Im s| <= T.

    Conjugate symmetry of the real-coefficient series folds the contour
    onto [0, T].  Panels are sized to the joint oscillation of x^{it} and
    the leading Dirichlet terms; ``check`` reruns at 1.5x the node density
    and raises if the two disagree by more than 0.05.
    """
    if float(x) == math.floor(x):
        raise ValueError("Perron evaluation needs non-integer x")
    if x <= 1.0:
        raise ValueError("x must exceed 1")
    if sigma0 is None:
        sigma0 = 1.0 + 1.0 / math.log(x)
    if sigma0 <= 1.0:
        raise ValueError("the series converges absolutely only for sigma0 > 1")
    if ctx is None:
        ctx = EvalContext(em_scale=0.35)

    def run(npp: float) -> float:
        omega = math.log(x) + 5.0  # x^{it} plus low Dirichlet frequencies
        nodes, weights = np.polynomial.legendre.leggauss(16)
        span = 16.0 * 2.0 * math.pi / (npp * omega)
        n_panels = max(4, int(math.ceil(T / span)))
        edges = np.linspace(0.0, T, n_panels + 1)
        total = 0.0
        block = 48  # panels per batched kernel call
        lx = math.log(x)
        for b0 in range(0, n_panels, block):
            b1 = min(b0 + block, n_panels)
            lo = edges[b0:b1, None]
            hi = edges[b0 + 1 : b1 + 1, None]
            t = (0.5 * (hi - lo) * nodes[None, :] + 0.5 * (hi + lo)).ravel()
            w = (0.5 * (hi - lo) * weights[None, :]).ravel()
            s = sigma0 + 1j * t
            F = generating_series(spec, s, ctx)
            integrand = (F * np.exp(s * lx) / s).real
            total += float(integrand @ w)
        return total / math.pi

    val = run(nodes_per_period)
    if check:
        val2 = run(nodes_per_period * 1.5)
        if abs(val - val2) > 0.05:
            raise QuadratureError(
                f"quadrature drift {abs(val - val2):.3g} at x={x}, T={T}"
            )
        val = val2
    return val


# -- short-window mean square ---------------------------------------------------


def window_variance(terms, T_lo: float, T_hi: float, Z: float, k: int) -> float:
    """int_Z^{Z+1} |sum_{T_lo < gamma <= T_hi} c_rho e^{i y gamma / k}|^2 dy
    by Gauss-Legendre quadrature resolving the highest beat frequency."""
    band = [t for t in terms if T_lo < t.gamma <= T_hi]
    if not band:
        return 0.0
    lam = np.array([t.gamma / k for t in band])
    c = np.array([t.coeff for t in band])
    beat = float(lam.max() - lam.min())
    n = max(64, int(6.0 * beat / (2.0 * math.pi)) + 32)
    nodes, weights = np.polynomial.legendre.leggauss(min(n, 6000))
    y = 0.5 * nodes + (Z + 0.5)
    w = 0.5 * weights
    E = np.exp(1j * np.multiply.outer(y, lam))
    v = E @ c
    return float((np.abs(v) ** 2) @ w)


def coefficient_decay_fit(terms) -> tuple[float, float]:
    """Fit |c_rho| ~ A gamma^{-beta}; the gamma-factor argument predicts
    beta near 1/2 + 1/(2k)."""
    g = np.array([t.gamma for t in terms])
    a = np.array([abs(t.coeff) for t in terms])
    if len(terms) < 4:
        raise ValueError("need at least 4 terms for a decay fit")
    coef = np.polyfit(np.log(g), np.log(a), 1)
    return float(math.exp(coef[1])), float(-coef[0])
