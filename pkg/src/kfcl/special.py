"""Complex-analytic evaluation kernel.

Euler-Maclaurin evaluation of the Hurwitz zeta function drives everything:
zeta, Dirichlet L-functions for real characters, and their s-derivatives
(differentiated term by term, never by finite differences).  The cutoff of
the main sum scales with |Im s|, which keeps the Bernoulli correction series
convergent at every height this package visits (|t| up to a few times 10^4).

Also housed here: the gamma-factor ratio of the asymmetric functional
equation, the finite Euler product over primes dividing the modulus, the
Bessel function J0, the Barnes G-function, and the arithmetic factor
alpha(r) of the moment-constant prediction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .characters import DirichletCharacter, gauss_sum, prime_factors

_EULER_GAMMA = 0.5772156649015328606065120900824024


class PoleProximityWarning(UserWarning):
    """Evaluation requested too close to a pole for full accuracy."""


class PoleError(ArithmeticError):
    """Evaluation requested at (or numerically at) a pole."""


class PrecisionError(ArithmeticError):
    """The requested accuracy is not reachable with the current context."""


class CutoffError(ValueError):
    """A truncated product/sum was cut off before its terms settled."""


@dataclass(frozen=True)
class EvalContext:
    """Knobs for the Euler-Maclaurin kernel.

    ``digits`` is the truncation target in decimal digits; arithmetic runs
    in hardware doubles unless ``extended`` is set, in which case evaluation
    is delegated to an arbitrary-precision backend at that many digits.
    ``em_scale``/``em_base`` set the main-sum cutoff M = max(base, scale*|t|).
    """

    digits: int = 30
    em_scale: float = 0.5
    em_base: int = 32
    bernoulli_depth: int = 30
    extended: bool = False

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError("precision below 15 digits is not supported")
        if self.em_scale <= 0.15:
            raise ValueError("em cutoff must scale with |Im s| (scale > 0.15)")

    def cutoff(self, tmax: float) -> int:
        return max(self.em_base, int(self.em_scale * tmax) + 1)


DEFAULT_CTX = EvalContext()


@lru_cache(maxsize=4)
def _bernoulli_factors(depth: int) -> tuple[float, ...]:
    """B_{2j}/(2j)! for j = 1..depth, exact rationals converted once."""
    # B_m via the standard recurrence sum_{k<=m} C(m+1,k) B_k = 0
    n = 2 * depth + 1
    b = [Fraction(0)] * (n + 1)
    b[0] = Fraction(1)
    for m in range(1, n + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += Fraction(math.comb(m + 1, k)) * b[k]
        b[m] = -acc / (m + 1)
    out = []
    fact = Fraction(1)
    for j in range(1, depth + 1):
        fact *= Fraction((2 * j - 1) * (2 * j))
        out.append(float(b[2 * j] / fact))
    return tuple(out)


def _hurwitz_em(s, a: float, ctx: EvalContext, want_deriv: bool = False,
                include_pole: bool = True):
    """Euler-Maclaurin Hurwitz zeta over a vector of s values sharing the
    shift a.  Returns (values, derivatives or None).  With include_pole=False
    the (M+a)^{1-s}/(s-1) term is left out so a caller can re-add it in a
    cancellation-safe combination (Dirichlet L near s = 1)."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    tmax = float(np.max(np.abs(s.imag))) if s.size else 0.0
    M = ctx.cutoff(tmax)
    n = np.arange(M, dtype=float)
    logb = np.log(n + a)
    E = np.exp(-np.multiply.outer(s, logb))
    val = E.sum(axis=1)
    dval = -(E * logb).sum(axis=1) if want_deriv else None

    c = float(M) + a
    lc = math.log(c)
    cpow = np.exp(-s * lc)
    val = val + 0.5 * cpow
    if want_deriv:
        dval = dval - 0.5 * lc * cpow
    if include_pole:
        sm1 = s - 1.0
        t_pole = cpow * c / sm1
        val = val + t_pole
        if want_deriv:
            dval = dval - lc * t_pole - t_pole / sm1

    bf = _bernoulli_factors(ctx.bernoulli_depth)
    # incremental Bernoulli tail: T_j = bf[j] * (s)_{2j-1} * c^{-s-2j+1}
    term = bf[0] * s * cpow / c
    if want_deriv:
        harm = 1.0 / s
        dterm = term * (harm - lc)
    total = term.copy()
    dtotal = dterm.copy() if want_deriv else None
    prev_mag = float(np.max(np.abs(term))) if term.size else 0.0
    for j in range(2, ctx.bernoulli_depth + 1):
        f1 = s + (2 * j - 3)
        f2 = s + (2 * j - 2)
        term = term * (bf[j - 1] / bf[j - 2]) * f1 * f2 / (c * c)
        mag = float(np.max(np.abs(term)))
        if mag > prev_mag and j > 3:
            break  # asymptotic series started diverging; stop at its floor
        total += term
        if want_deriv:
            harm = harm + 1.0 / f1 + 1.0 / f2
            dtotal += term * (harm - lc)
        scale = float(np.max(np.abs(val))) or 1.0
        if mag < 1e-19 * scale:
            break
        prev_mag = mag
    val = val + total
    if want_deriv:
        dval = dval + dtotal
    return val, dval


# -- zeta ------------------------------------------------------------------


def _warn_pole(s):
    if abs(s - 1.0) < 1e-6:
        warnings.warn(
            f"zeta evaluated within 1e-6 of the pole at s=1 (s={s})",
            PoleProximityWarning,
            stacklevel=3,
        )


def zeta(s: complex, ctx: EvalContext = DEFAULT_CTX) -> complex:
    """Riemann zeta via Euler-Maclaurin; valid in the strip this package
    uses (Re s > -2J).  Warns when |s-1| < 1e-6."""
    _warn_pole(s)
    if ctx.extended:
        return _mp_zeta(s, ctx, 0)
    v, _ = _hurwitz_em([s], 1.0, ctx)
    return complex(v[0])


def zeta_deriv(s: complex, ctx: EvalContext = DEFAULT_CTX) -> complex:
    _warn_pole(s)
    if ctx.extended:
        return _mp_zeta(s, ctx, 1)
    _, d = _hurwitz_em([s], 1.0, ctx, want_deriv=True)
    return complex(d[0])


def zeta_with_deriv(s: complex, ctx: EvalContext = DEFAULT_CTX) -> tuple[complex, complex]:
    _warn_pole(s)
    v, d = _hurwitz_em([s], 1.0, ctx, want_deriv=True)
    return complex(v[0]), complex(d[0])


def zeta_batch(s, ctx: EvalContext = DEFAULT_CTX) -> np.ndarray:
    v, _ = _hurwitz_em(s, 1.0, ctx)
    return v


def hurwitz_zeta(s: complex, a: float, ctx: EvalContext = DEFAULT_CTX) -> complex:
    v, _ = _hurwitz_em([s], a, ctx)
    return complex(v[0])


def _mp_zeta(s, ctx, derivative):
    import mpmath as mp

    with mp.workdps(ctx.digits):
        return mp.zeta(s, 1, derivative) if derivative else mp.zeta(s)


# -- Dirichlet L ------------------------------------------------------------


def _l_pole_block(s, chi, M, want_deriv):
    """chi-weighted sum of the (M + a/q)^{1-s}/(s-1) pole terms.

    The weights sum to zero, so the combination is entire; near s = 1 it is
    evaluated through its expansion in powers of (1-s) to avoid the
    catastrophic cancellation of the individual terms."""
    s = np.asarray(s, dtype=complex)
    q = chi.modulus
    supp = [(a, chi.values[a % q]) for a in range(1, q + 1) if chi.values[a % q]]
    near = np.abs(s - 1.0) < 1e-3
    val = np.zeros(s.shape, dtype=complex)
    dval = np.zeros(s.shape, dtype=complex) if want_deriv else None
    if np.any(~near):
        sf = s[~near]
        sm1 = sf - 1.0
        v = np.zeros_like(sf)
        d = np.zeros_like(sf) if want_deriv else None
        for a, w in supp:
            c = float(M) + a / q
            lc = math.log(c)
            t = np.exp(-sf * lc) * c / sm1
            v += w * t
            if want_deriv:
                d += w * (-lc * t - t / sm1)
        val[~near] = v
        if want_deriv:
            dval[~near] = d
    if np.any(near):
        sn = s[near]
        u = 1.0 - sn
        v = np.zeros_like(sn)
        d = np.zeros_like(sn) if want_deriv else None
        # sum_a w (1/(1-s)) e^{(1-s) L_a} = -sum_m u^{m-1} A_m/m!, A_0 = 0
        for m in range(1, 10):
            A = sum(w * math.log(M + a / q) ** m for a, w in supp)
            fact = math.factorial(m)
            v += -(u ** (m - 1)) * (A / fact)
            if want_deriv and m >= 2:
                d += (m - 1) * u ** (m - 2) * (A / fact)
        val[near] = v
        if want_deriv:
            dval[near] = d
    return val, dval


def _l_em(s, chi: DirichletCharacter, ctx: EvalContext, want_deriv: bool = False):
    """L(s, chi) = q^{-s} sum_a chi(a) zeta_H(s, a/q) over a vector of s."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    q = chi.modulus
    tmax = float(np.max(np.abs(s.imag))) if s.size else 0.0
    M = ctx.cutoff(tmax)
    acc = np.zeros(s.shape, dtype=complex)
    dacc = np.zeros(s.shape, dtype=complex) if want_deriv else None
    for a in range(1, q + 1):
        w = chi.values[a % q]
        if w == 0:
            continue
        v, d = _hurwitz_em(s, a / q, ctx, want_deriv=want_deriv, include_pole=False)
        acc += w * v
        if want_deriv:
            dacc += w * d
    pv, pd = _l_pole_block(s, chi, M, want_deriv)
    acc += pv
    if want_deriv:
        dacc += pd
    qs = np.exp(-s * math.log(q))
    val = qs * acc
    if want_deriv:
        dval = qs * dacc - math.log(q) * val
        return val, dval
    return val, None


def l_function(s: complex, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX) -> complex:
    """Dirichlet L-function of a real non-principal character (entire)."""
    if sum(chi.values) != 0:
        raise ValueError("principal characters have a pole; not supported")
    if ctx.extended:
        return _mp_l(s, chi, ctx, 0)
    v, _ = _l_em([s], chi, ctx)
    return complex(v[0])


def l_deriv(s: complex, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX) -> complex:
    if ctx.extended:
        return _mp_l(s, chi, ctx, 1)
    _, d = _l_em([s], chi, ctx, want_deriv=True)
    return complex(d[0])


def l_with_deriv(s: complex, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX):
    v, d = _l_em([s], chi, ctx, want_deriv=True)
    return complex(v[0]), complex(d[0])


def l_batch(s, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX) -> np.ndarray:
    v, _ = _l_em(s, chi, ctx)
    return v


def _mp_l(s, chi, ctx, derivative):
    import mpmath as mp

    q = chi.modulus
    with mp.workdps(ctx.digits):
        acc = mp.mpf(0)
        for a in range(1, q + 1):
            w = chi.values[a % q]
            if w:
                acc += w * mp.zeta(s, mp.mpf(a) / q, derivative)
        if derivative:
            base = _mp_l(s, chi, ctx, 0)
            return mp.power(q, -s) * acc - mp.log(q) * base
        return mp.power(q, -s) * acc


# -- functional equation pieces ---------------------------------------------


def delta_ratio(s: complex, delta: int) -> complex:
    """Gamma-factor ratio pi^{s-1/2} Gamma((1-s+delta)/2) / Gamma((s+delta)/2).

    Satisfies Delta(s) Delta(1-s) = 1 and |Delta(sigma+it)| ~ (t/2pi)^{1/2-sigma}.
    """
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    num = (1.0 - s + delta) / 2.0
    den = (s + delta) / 2.0
    if abs(num - round(num.real)) < 1e-9 and round(num.real) <= 0 and abs(num.imag) < 1e-9:
        raise PoleError(f"gamma-factor pole at s={s}")
    if abs(den - round(den.real)) < 1e-12 and round(den.real) <= 0 and abs(den.imag) < 1e-12:
        return 0.0 + 0.0j
    return complex(np.exp((s - 0.5) * math.log(math.pi) + loggamma(num) - loggamma(den)))


def functional_equation_rhs(s: complex, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX) -> complex:
    """Right-hand side tau/(i^delta sqrt q) * q^{1/2-s} * Delta(s) * L(1-s, chi)
    of the asymmetric functional equation for real primitive chi.

    The modulus power q^{1/2-s} is required for the identity to hold
    numerically; dropping it breaks the equation by exactly that factor.
    """
    q = chi.modulus
    tau = gauss_sum(chi)
    eps = tau / (1j ** chi.parity * math.sqrt(q))
    return eps * q ** (0.5 - s) * delta_ratio(s, chi.parity) * l_function(1.0 - s, chi, ctx)


def zeta_functional_rhs(s: complex, ctx: EvalContext = DEFAULT_CTX) -> complex:
    return delta_ratio(s, 0) * zeta(1.0 - s, ctx)


def completed_l(s: complex, chi: DirichletCharacter, ctx: EvalContext = DEFAULT_CTX) -> complex:
    """(q/pi)^{(s+delta)/2} Gamma((s+delta)/2) L(s,chi); real on the critical
    line for real primitive chi (root number +1)."""
    q, d = chi.modulus, chi.parity
    w = (s + d) / 2.0
    return complex(np.exp(w * math.log(q / math.pi) + loggamma(w))) * l_function(s, chi, ctx)


# -- finite Euler product over p | q ----------------------------------------


@dataclass(frozen=True)
class FiniteEulerProduct:
    """prod_{p | q} (1 - p^{-s})^{-1}; analytic for Re s > 0, simple poles
    on the imaginary axis at 2 pi i t / log p."""

    modulus: int

    @property
    def primes(self) -> tuple[int, ...]:
        return prime_factors(self.modulus)

    def value(self, s: complex) -> complex:
        out = 1.0 + 0.0j
        for p in self.primes:
            f = 1.0 - p ** (-complex(s))
            if abs(f) < 1e-12:
                raise PoleError(f"finite product pole near s={s} (p={p})")
            out /= f
        return out

    def value_batch(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        out = np.ones(s.shape, dtype=complex)
        for p in self.primes:
            f = 1.0 - np.exp(-s * math.log(p))
            if np.any(np.abs(f) < 1e-12):
                raise PoleError(f"finite product pole in batch (p={p})")
            out /= f
        return out

    def __call__(self, s):
        return self.value(s)


def p_product(P: FiniteEulerProduct, s: complex) -> complex:
    return P.value(s)


# -- Bessel J0 ---------------------------------------------------------------

_J0_BRANCH = 12.0


def _j0_series(z: float) -> float:
    # power series in extended precision; cancellation-safe through z ~ 18
    zq = np.longdouble(z) * np.longdouble(z) / 4.0
    acc = np.longdouble(1.0)
    term = np.longdouble(1.0)
    m = 0
    while m < 200:
        m += 1
        term = -term * zq / (m * m)
        acc += term
        if abs(term) < np.longdouble(1e-24) * max(np.longdouble(1.0), abs(acc)):
            break
    return float(acc)


def _j0_asymptotic(z: float) -> float:
    # Hankel expansion at optimal truncation; floor ~1e-12 at the branch point
    w = z - math.pi / 4.0
    c = 1.0
    vals = []
    m = 0
    while m < 120:
        vals.append(c)
        nxt = c * ((2 * m + 1) ** 2) / ((m + 1) * 8.0 * z)
        if m > 4 and abs(nxt) > abs(c):
            break
        c = nxt
        m += 1
    P = Q = 0.0
    for i, v in enumerate(vals):
        if i % 4 == 0:
            P += v
        elif i % 4 == 1:
            Q -= v
        elif i % 4 == 2:
            P -= v
        else:
            Q += v
    return math.sqrt(2.0 / (math.pi * z)) * (math.cos(w) * P - math.sin(w) * Q)


def bessel_j0(z):
    """J0 to absolute accuracy ~1e-12: power series for |z| <= 12, Hankel
    asymptotic expansion beyond.  Accepts scalars or arrays."""
    if np.ndim(z) == 0:
        x = abs(float(z))
        return _j0_series(x) if x <= _J0_BRANCH else _j0_asymptotic(x)
    z = np.abs(np.asarray(z, dtype=float))
    return np.array([_j0_series(x) if x <= _J0_BRANCH else _j0_asymptotic(x) for x in z.ravel()]).reshape(z.shape)


# -- Barnes G and the moment constant ----------------------------------------


@lru_cache(maxsize=1)
def _zeta_int_table():
    from scipy.special import zeta as real_zeta

    return real_zeta(np.arange(2, 200, dtype=float))


def _log_barnes_shifted(z: complex) -> complex:
    # log G(1+z) for |z| <= 1/2 via the zeta-accelerated product expansion
    zt = _zeta_int_table()
    acc = complex(z) / 2.0 * math.log(2.0 * math.pi) - (z + z * z * (1.0 + _EULER_GAMMA)) / 2.0
    zp = complex(z) ** 3
    for j in range(2, 200):
        term = ((-1) ** (j + 1)) * zt[j - 2] * zp / (j + 1)
        acc += term
        if abs(term) < 1e-20 * max(1.0, abs(acc)):
            break
        zp *= z
    return acc


def barnes_g(s: complex, ctx: EvalContext = DEFAULT_CTX) -> complex:
    """Barnes G, normalized by G(1) = G(2) = 1 and G(s+1) = Gamma(s) G(s).

    Evaluated as exp(log G) after recurrence reduction of s-1 into |z| <= 1/2;
    the product definition is summed in its zeta-accelerated rearrangement.
    """
    z = complex(s) - 1.0
    shift = 0.0 + 0.0j
    while z.real > 0.5:
        z -= 1.0
        shift += loggamma(z + 1.0)
    while z.real < -0.5:
        if abs(z + 1.0) < 1e-14 or abs(z + 1.0 - round((z + 1.0).real)) < 1e-14 and (z + 1.0).real <= 0:
            return 0.0 + 0.0j  # G vanishes at non-positive integers
        shift -= loggamma(z + 1.0)
        z += 1.0
    return complex(np.exp(_log_barnes_shifted(z) + shift))


@dataclass(frozen=True)
class AlphaValue:
    value: float
    tail_estimate: float
    cutoff: int


def alpha_r(r: float, prime_cutoff: int = 100_000, factor_tol: float = 1e-4) -> AlphaValue:
    """Euler product prod_p (1-1/p)^{r^2} sum_m ((r)_m / m!)^2 p^{-m}.

    Truncated at the prime cutoff; the tail estimate extrapolates the
    ~C/p^2 decay of log(factor).  Raises when the last factors have not
    settled to within factor_tol of 1.
    """
    if r <= -1.5:
        raise ValueError("defined for r > -3/2")
    primes = _primes_upto(prime_cutoff)
    value = 1.0
    last_logs = []
    for p in primes:
        inv = 1.0 / p
        coef = 1.0  # (r)_m / m!
        term = 1.0
        acc = 1.0
        m = 0
        while m < 400:
            coef *= (r + m) / (m + 1.0)
            m += 1
            term = coef * coef * inv**m
            acc += term
            if coef == 0.0 or abs(term) < 1e-19 * abs(acc):
                break
        factor = (1.0 - inv) ** (r * r) * acc
        value *= factor
        if p > primes[-1] * 0.9:
            last_logs.append((p, abs(math.log(factor))))
    last_p, last_log = last_logs[-1]
    if last_log > factor_tol:
        raise CutoffError(
            f"prime cutoff {prime_cutoff} too small: last factor deviates by {last_log:.2e}"
        )
    # sum_{p > P} C/p^2 ~ C/(P log P) with C calibrated on the final factors
    C = np.mean([lp * pp * pp for pp, lp in last_logs]) if last_logs else 0.0
    tail = C / (last_p * math.log(last_p))
    return AlphaValue(value=value, tail_estimate=float(tail), cutoff=prime_cutoff)


def hko_constant(r: float, ctx: EvalContext = DEFAULT_CTX, prime_cutoff: int = 100_000) -> float:
    """Leading constant (1/2pi) G^2(r+2)/G(2r+3) alpha(r) of the predicted
    discrete-moment asymptotic C * T (log T)^{(r+1)^2}."""
    if r <= -1.5:
        raise ValueError("defined for r > -3/2")
    g_num = barnes_g(r + 2.0, ctx)
    g_den = barnes_g(2.0 * r + 3.0, ctx)
    a = alpha_r(r, prime_cutoff=prime_cutoff)
    return float((g_num.real**2 / g_den.real) * a.value / (2.0 * math.pi))


@lru_cache(maxsize=8)
def _primes_upto(n: int) -> tuple[int, ...]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])
