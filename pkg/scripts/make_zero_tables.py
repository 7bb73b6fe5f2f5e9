#!/usr/bin/env python3
"""Regenerate the zero tables shipped in src/kfcl/data/.

Zeta ordinates come from mpmath's zetazero (independent of this package's
evaluators).  The small L-function tables are produced by the package's
completed-function scanner and cross-checked against the counting formula;
rerun after any change to the analytic kernel.
"""

import sys
import time
from pathlib import Path

import mpmath as mp

DATA = Path(__file__).resolve().parents[1] / "src" / "kfcl" / "data"


def write_zeta(n_zeros: int = 1000) -> None:
    mp.mp.dps = 25
    out = DATA / "zeta_zeros.txt"
    t0 = time.time()
    with out.open("w", encoding="utf-8") as fh:
        fh.write("# Imaginary parts of the first %d nontrivial zeta zeros\n" % n_zeros)
        fh.write("# (one ascending ordinate per line, 13 decimal places)\n")
        for n in range(1, n_zeros + 1):
            g = mp.zetazero(n).imag
            fh.write(mp.nstr(g, 18, strip_zeros=False) + "\n")
            if n % 100 == 0:
                print(f"  zeta zero {n} ({time.time()-t0:.0f}s)", flush=True)
    print(f"wrote {out}")


def write_l_table(q: int, t_max: float = 130.0) -> None:
    from kfcl.characters import quadratic_character
    from kfcl.special import EvalContext, l_function
    from kfcl.zeros import counting_main_term, scan_zeros

    chi = quadratic_character(q)
    ctx = EvalContext()
    cat = scan_zeros(chi, t_max, ctx, step=0.08, tol=1e-12)
    # sanity: every zero genuinely on the line, and none missed by the scan
    for r in cat.records:
        assert abs(l_function(complex(0.5, r.gamma), chi, ctx)) < 1e-10, r
    expect = counting_main_term(t_max, chi)
    got = len(cat.records)
    assert abs(got - expect) < 3 + 3 * mp.log(q * t_max), (got, expect)
    out = DATA / f"l_zeros_q{q}.txt"
    with out.open("w", encoding="utf-8") as fh:
        fh.write(f"# Ordinates of L(s, {chi.label()}) zeros up to {t_max}\n")
        for r in cat.records:
            fh.write(f"{r.gamma:.13f}\n")
    print(f"wrote {out} ({got} zeros, main term {expect:.1f})")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("all", "zeta"):
        write_zeta()
    if which in ("all", "l"):
        write_l_table(3)
        write_l_table(4)
