"""Zero catalogs: ingestion, Newton refinement, enrichment with derivative
values, counting checks, and discrete moments.

Catalogs hold positive ordinates only; conjugate zeros are accounted for
downstream by doubling real parts.  Ordinates come from published-style
tables (plain text) or from the enriched csv written after refinement; the
derivative at each zero is the expensive, cacheable part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .characters import DirichletCharacter
from .special import (
    DEFAULT_CTX,
    EvalContext,
    completed_l,
    l_with_deriv,
    zeta_with_deriv,
)


class ZeroFileError(ValueError):
    """Malformed zero table; carries the offending line number."""

    def __init__(self, path, line, message):
        self.path, self.line = path, line
        super().__init__(f"{path}:{line}: {message}")


class RefinementError(ArithmeticError):
    """Newton iteration failed to converge to a zero."""


class SimplicityError(ArithmeticError):
    """Derivative magnitude too small; possible multiple zero."""


class MissingDerivativeError(ValueError):
    """Operation needs enriched records below the requested height."""


@dataclass(frozen=True)
class ZeroRecord:
    gamma: float
    deriv: complex | None = None
    source: str = "dataset"


@dataclass
class ZeroCatalog:
    """Sorted positive ordinates of one function: the zeta function
    (``function`` is the string "zeta") or L(., chi) for a real primitive
    character (``function`` is the character)."""

    function: object
    records: list[ZeroRecord]

    def __post_init__(self):
        g = [r.gamma for r in self.records]
        if any(x <= 0 for x in g):
            raise ValueError("ordinates must be positive")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("ordinates must be strictly increasing")

    @property
    def is_zeta(self) -> bool:
        return self.function == "zeta"

    @property
    def modulus(self) -> int:
        return 1 if self.is_zeta else self.function.modulus

    def function_id(self) -> str:
        return "zeta" if self.is_zeta else f"L_{self.function.label()}"

    @property
    def gammas(self) -> np.ndarray:
        return np.array([r.gamma for r in self.records])

    @property
    def t_max(self) -> float:
        return self.records[-1].gamma if self.records else 0.0

    def count(self, T: float) -> int:
        return int(np.searchsorted(self.gammas, T, side="right")) if self.records else 0

    def upto(self, T: float) -> list[ZeroRecord]:
        return [r for r in self.records if r.gamma <= T]


def parse_zero_file(path: str, fmt: str = "plain", function: object = "zeta") -> ZeroCatalog:
    """plain: one ascending decimal ordinate per line, '#' comments allowed.
    csv: header ``gamma,dre,dim`` followed by three decimals per row."""
    records: list[ZeroRecord] = []
    prev = 0.0
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if fmt == "plain":
        for i, line in enumerate(lines, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            try:
                g = float(body)
            except ValueError:
                raise ZeroFileError(path, i, f"unparsable ordinate {body!r}") from None
            if g <= 0:
                raise ZeroFileError(path, i, f"non-positive ordinate {g}")
            if g <= prev:
                raise ZeroFileError(path, i, f"ordinate {g} not above previous {prev}")
            records.append(ZeroRecord(gamma=g))
            prev = g
    elif fmt == "csv":
        if not lines or lines[0].strip() != "gamma,dre,dim":
            raise ZeroFileError(path, 1, "missing 'gamma,dre,dim' header")
        for i, line in enumerate(lines[1:], start=2):
            body = line.strip()
            if not body:
                continue
            parts = body.split(",")
            if len(parts) != 3:
                raise ZeroFileError(path, i, f"expected 3 fields, got {len(parts)}")
            try:
                g, dre, dim = (float(p) for p in parts)
            except ValueError:
                raise ZeroFileError(path, i, f"unparsable row {body!r}") from None
            if g <= 0:
                raise ZeroFileError(path, i, f"non-positive ordinate {g}")
            if g <= prev:
                raise ZeroFileError(path, i, f"ordinate {g} not above previous {prev}")
            records.append(ZeroRecord(gamma=g, deriv=complex(dre, dim)))
            prev = g
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return ZeroCatalog(function=function, records=records)


def serialize_catalog(catalog: ZeroCatalog, path: str, fmt: str = "csv") -> None:
    """csv rows use shortest round-tripping decimals, so parse(serialize(c))
    reproduces the floats bit for bit."""
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "plain":
            for r in catalog.records:
                fh.write(f"{r.gamma!r}\n")
        elif fmt == "csv":
            fh.write("gamma,dre,dim\n")
            for r in catalog.records:
                if r.deriv is None:
                    raise MissingDerivativeError(
                        f"record at gamma={r.gamma} has no derivative"
                    )
                fh.write(f"{r.gamma!r},{r.deriv.real!r},{r.deriv.imag!r}\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")


def packaged_zero_path(name: str):
    """Path to a zero table shipped with the package (e.g. 'zeta_zeros')."""
    return resources.files("kfcl.data").joinpath(name + ".txt")


def load_packaged_catalog(name: str, function: object = "zeta") -> ZeroCatalog:
    with resources.as_file(packaged_zero_path(name)) as p:
        return parse_zero_file(str(p), "plain", function)


# -- refinement --------------------------------------------------------------


def _eval_with_deriv(s: complex, function, ctx: EvalContext):
    if function == "zeta":
        return zeta_with_deriv(s, ctx)
    return l_with_deriv(s, function, ctx)


def refine_zero(
    gamma0: float,
    function: object = "zeta",
    ctx: EvalContext = DEFAULT_CTX,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> ZeroRecord:
    """Newton iteration for gamma near gamma0 with F(1/2 + i gamma) = 0.

    Returns the refined ordinate together with F'(rho); the update uses
    dF/dgamma = i F' and keeps the iterate on the critical line.
    """
    g = float(gamma0)
    for _ in range(max_iter):
        F, dF = _eval_with_deriv(complex(0.5, g), function, ctx)
        if abs(dF) < 1e-12:
            raise SimplicityError(
                f"|F'| = {abs(dF):.2e} at gamma={g}; refusing a near-multiple zero"
            )
        if abs(F) < tol:
            return ZeroRecord(gamma=g, deriv=dF, source="computed")
        step = F / (1j * dF)
        g -= step.real
    raise RefinementError(f"no convergence from gamma0={gamma0} in {max_iter} steps")


def enrich_catalog(
    catalog: ZeroCatalog,
    ctx: EvalContext = DEFAULT_CTX,
    t_max: float | None = None,
    tol: float = 1e-10,
) -> ZeroCatalog:
    """Refine every record up to t_max and attach derivative values."""
    out = []
    for r in catalog.records:
        if t_max is not None and r.gamma > t_max:
            break
        if r.deriv is not None:
            out.append(r)
            continue
        out.append(refine_zero(r.gamma, catalog.function, ctx, tol=tol))
    return ZeroCatalog(function=catalog.function, records=out)


# -- counting ----------------------------------------------------------------


def counting_main_term(T: float, function: object = "zeta") -> float:
    """Smooth main term (T/2pi) log(qT/2pi e) for the one-sided zero count
    up to height T, q = 1 for zeta (plus its constant 7/8).

    The same expression serves both functions: scanning L(., chi mod 3)
    zeros to height 130 yields 65 sign changes against a main term of 64.7,
    so the formula counts per sign, not both signs at once.
    """
    if function == "zeta":
        return T / (2 * math.pi) * math.log(T / (2 * math.pi * math.e)) + 7.0 / 8.0
    q = function.modulus
    return T / (2 * math.pi) * math.log(q * T / (2 * math.pi * math.e))


@dataclass(frozen=True)
class CountCheck:
    T: float
    count: int
    main_term: float
    residual: float
    bound: float
    flagged: bool


def zero_count_check(catalog: ZeroCatalog, T: float, C: float = 3.0) -> CountCheck:
    """count(T) minus the main term, flagged when it exceeds C log(qT)."""
    if T < 4.0:
        raise ValueError("counting check needs T >= 4")
    if T > catalog.t_max:
        raise ValueError(f"T={T} beyond catalog height {catalog.t_max}")
    n = catalog.count(T)
    main = counting_main_term(T, catalog.function)
    res = n - main
    bound = C * math.log(catalog.modulus * T)
    return CountCheck(
        T=T, count=n, main_term=main, residual=res, bound=bound,
        flagged=abs(res) > bound,
    )


# -- discrete moments --------------------------------------------------------


def discrete_moment(catalog: ZeroCatalog, r: float, T: float) -> float:
    """sum over 0 < gamma <= T of |F'(rho)|^{2r}."""
    total = 0.0
    for rec in catalog.records:
        if rec.gamma > T:
            break
        if rec.deriv is None:
            raise MissingDerivativeError(
                f"record at gamma={rec.gamma} lacks a derivative value"
            )
        total += abs(rec.deriv) ** (2.0 * r)
    return total


@dataclass(frozen=True)
class MomentFit:
    r: float
    exponent: float
    log_exponent: float
    amplitude: float
    predicted_log_exponent: float
    constants: np.ndarray  # J_r(T) / (T (log T)^{(r+1)^2}) along the grid
    caveat: str = "finite-height consistency probe, not an asymptotic statement"


def moment_growth_fit(catalog: ZeroCatalog, r: float, T_grid) -> MomentFit:
    """Least squares of log J_r against log T and log log T."""
    T_grid = np.asarray(T_grid, dtype=float)
    if T_grid.size < 3:
        raise ValueError("need at least 3 grid heights")
    J = np.array([discrete_moment(catalog, r, T) for T in T_grid])
    if np.any(J <= 0):
        raise ValueError("degenerate grid: moment vanishes at some heights")
    A = np.column_stack([np.log(T_grid), np.log(np.log(T_grid)), np.ones_like(T_grid)])
    coef, *_ = np.linalg.lstsq(A, np.log(J), rcond=None)
    shape = (r + 1.0) ** 2
    consts = J / (T_grid * np.log(T_grid) ** shape)
    return MomentFit(
        r=r,
        exponent=float(coef[0]),
        log_exponent=float(coef[1]),
        amplitude=float(math.exp(coef[2])),
        predicted_log_exponent=shape,
        constants=consts,
    )


# -- hypothesis probes --------------------------------------------------------


@dataclass(frozen=True)
class AssumptionsReport:
    T_grid: np.ndarray
    weighted_sums: np.ndarray  # sum lambda^2 |r|^2 up to T
    theta_fit: float
    counts: np.ndarray  # N_lambda(T)
    count_constant: float  # max N / (T log T)
    max_unit_gap_counts: np.ndarray  # max over unit windows below T
    gap_constant: float  # max of unit-window count / log T


def assumptions_probe(lambdas, weights, T_grid) -> AssumptionsReport:
    """Tabulate the three frequency-side hypotheses behind the almost-
    periodicity machinery: the lambda^2-weighted square sum (fit its growth
    exponent theta), the counting bound N(T) <= C T log T, and the log-T
    bound for points per unit interval."""
    lam = np.asarray(lambdas, dtype=float)
    w = np.abs(np.asarray(weights))
    order = np.argsort(lam)
    lam, w = lam[order], w[order]
    T_grid = np.asarray(T_grid, dtype=float)
    if lam.size == 0 or T_grid.size < 2:
        raise ValueError("insufficient data for the probe")
    cum = np.cumsum(lam**2 * w**2)
    idx = np.searchsorted(lam, T_grid, side="right")
    S = cum[np.maximum(idx - 1, 0)] * (idx > 0)
    counts = idx.astype(float)
    ok = S > 0
    if ok.sum() >= 2:
        coef = np.polyfit(np.log(T_grid[ok]), np.log(S[ok]), 1)
        theta = float(coef[0])
    else:
        theta = float("nan")
    count_c = float(np.max(counts / (T_grid * np.log(T_grid))))
    gap_max = []
    for T in T_grid:
        lo = lam[lam <= T]
        edges = np.arange(3.0, T + 1.0)
        if edges.size < 2 or lo.size == 0:
            gap_max.append(0.0)
            continue
        h, _ = np.histogram(lo, bins=edges)
        gap_max.append(float(h.max()) if h.size else 0.0)
    gap_max = np.array(gap_max)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap_c = float(np.nanmax(gap_max / np.log(T_grid)))
    return AssumptionsReport(
        T_grid=T_grid,
        weighted_sums=S,
        theta_fit=theta,
        counts=counts,
        count_constant=count_c,
        max_unit_gap_counts=gap_max,
        gap_constant=gap_c,
    )


# -- away-from-zeros heights ---------------------------------------------------


def exceptional_heights(catalog: ZeroCatalog, n_lo: int, n_hi: int) -> np.ndarray:
    """One height T_n in each [n, n+1] maximizing the distance to the
    catalog ordinates; midpoints between consecutive zeros are the natural
    candidates, clamped to the unit window."""
    g = catalog.gammas
    out = []
    for n in range(n_lo, n_hi + 1):
        cands = [float(n), float(n + 1)]
        i = np.searchsorted(g, n)
        for j in range(max(i - 1, 0), min(i + 3, len(g) - 1)):
            mid = 0.5 * (g[j] + g[j + 1])
            cands.append(min(max(mid, float(n)), float(n + 1)))
        best = max(cands, key=lambda t: np.min(np.abs(g - t)) if len(g) else 1.0)
        out.append(best)
    return np.array(out)


# -- scanning (builds small L tables; zeta tables ship with the package) -----


def scan_zeros(
    function,
    t_max: float,
    ctx: EvalContext = DEFAULT_CTX,
    step: float = 0.1,
    tol: float = 1e-11,
) -> ZeroCatalog:
    """Locate zeros on (0, t_max] by sign changes of the completed function
    on the critical line, then polish each bracket by Newton iteration."""
    if function == "zeta":
        raise ValueError("zeta ordinates ship as a dataset; scanning targets L")
    grid = np.arange(step, t_max + step, step)
    vals = np.array([completed_l(complex(0.5, t), function, ctx).real for t in grid])
    records = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            continue
        if vals[i] * vals[i + 1] < 0:
            lo, hi = grid[i], grid[i + 1]
            for _ in range(20):  # bisect into Newton's basin
                mid = 0.5 * (lo + hi)
                vm = completed_l(complex(0.5, mid), function, ctx).real
                if vals[i] * vm < 0:
                    hi = mid
                else:
                    lo = mid
            rec = refine_zero(0.5 * (lo + hi), function, ctx, tol=tol)
            if rec.gamma <= t_max:
                records.append(rec)
    records.sort(key=lambda r: r.gamma)
    return ZeroCatalog(function=function, records=records)
