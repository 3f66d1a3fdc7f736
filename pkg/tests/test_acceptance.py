"""Acceptance checks, one per criterion. Each prints a PASS/FAIL line.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import random
import sys
import time
from math import comb
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from _gen import random_rca, random_term  # noqa: E402
from maxsub.canon import NAMED, cst0, dbl, half, ident, mix, pred, succ  # noqa: E402
from maxsub.engine import Tri, classify, window_report  # noqa: E402
from maxsub.extnat import ext_add  # noqa: E402
from maxsub.rca import rca_compose, rca_invariants  # noqa: E402
from maxsub.sandbox import all_maps, run_preset  # noqa: E402
from maxsub.terms import ColEmbed, ColProj, Compose, Rca, compose  # noqa: E402
from maxsub.transversal import construct_h, enumerate_j, exhaustive_corpus, is_in_j, minimal_hitting_sets  # noqa: E402
from maxsub.witnesses import cp_square, w_cp, w_dual, w_inj, w_left_gen_fi, w_right_gen, w_sur, w_sym_from_inj  # noqa: E402

RESULTS: list[str] = []


def report(number: int, ok: bool, elapsed: float, limit: float, detail: str) -> bool:
    passed = ok and elapsed < limit
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}; {elapsed:.2f}s (limit {limit:g}s)"
    RESULTS.append(line)
    print(line)
    return passed


def criterion_1() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(1)
    violations = mismatches = 0
    for _ in range(500):
        a, b = random_rca(rng), random_rca(rng)
        ab = rca_compose(a, b)
        ia, ib, iab = rca_invariants(a), rca_invariants(b), rca_invariants(ab)
        violations += not (iab.d <= ext_add(ia.d, ib.d))
        violations += not (iab.c <= ext_add(ia.c, ib.c))
        violations += not (iab.k <= ext_add(ia.k, ib.k))
        mismatches += sum(ab(n) != b(a(n)) for n in range(2000))
    return report(1, violations == 0 and mismatches == 0, time.perf_counter() - t0, 10,
                  f"500 pairs, {violations} subadditivity violations, {mismatches} oracle mismatches on [0,2000)")


TABLE = {
    "succ": {"Inj"}, "dbl": {"Inj", "FI"}, "half": {"Sur", "IF"}, "pred": {"Sur"}, "cst0": {"FiniteRank"},
    "mix": {"Sur", "IF"}, "colproj": {"Sur", "Cp", "IF", "CpGenerated"}, "colembed": {"Inj", "FI"},
}


def criterion_2() -> bool:
    t0 = time.perf_counter()
    wrong, unknown = [], []
    for name, expected in TABLE.items():
        flags = classify(NAMED[name])
        got = {n for n, v in flags.items() if v is Tri.YES}
        unknown += [f"{name}.{n}" for n, v in flags.items() if v is Tri.UNKNOWN]
        if got != expected:
            wrong.append(f"{name}: got {sorted(got)}, table {sorted(expected)}")
    detail = f"{len(TABLE) - len(wrong)}/8 rows match, {len(unknown)} Unknown flags"
    if wrong:
        detail += " [" + "; ".join(wrong) + "]"
    return report(2, not wrong and not unknown, time.perf_counter() - t0, 1, detail)


def criterion_3() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(3)
    counts = {h: 0 for h in ("Inj", "Sur", "Cp", "IF", "FI")}
    violations = 0
    tries = 0
    while min(counts.values()) < 200 and tries < 100_000:
        tries += 1
        a, b = random_term(rng, 2), random_term(rng, 2)
        fa, fb, fc = classify(a), classify(b), classify(Compose(a, b))
        for h in counts:
            if counts[h] < 200 and fa[h] is Tri.NO and fb[h] is Tri.NO and fc[h] is not Tri.UNKNOWN:
                counts[h] += 1
                violations += fc[h] is Tri.YES
    ok = violations == 0 and min(counts.values()) == 200
    return report(3, ok, time.perf_counter() - t0, 30,
                  f"pairs per class {counts}, {violations} violations")


def criterion_4() -> bool:
    t0 = time.perf_counter()
    W = 10_000
    cp = ColProj()
    runs = {
        "w_inj(succ,dbl)": lambda: w_inj(succ, dbl, W=W),
        "w_inj(dbl,dbl)": lambda: w_inj(dbl, dbl, W=W),
        "w_sur(half,pred)": lambda: w_sur(half, pred, W=W),
        "w_sur(half,half)": lambda: w_sur(half, half, W=W),
        "w_cp(ColProj,ColProj)": lambda: w_cp(cp, cp, W=W),
        "w_cp(ColProj,ColProj;succ)": lambda: w_cp(cp, compose(cp, succ), W=W),
        "w_dual(IF,half,half)": lambda: w_dual("IF", half, half, W=W),
        "w_dual(FI,dbl,dbl)": lambda: w_dual("FI", dbl, dbl, W=W),
        "w_sym_from_inj(succ,id)": lambda: w_sym_from_inj(succ, ident, W=W),
        "w_left_gen_fi(ColProj,dbl)": lambda: w_left_gen_fi(cp, dbl, W=W),
        "w_right_gen(IF,dbl,succ)": lambda: w_right_gen("IF", dbl, succ, W=W),
        "w_right_gen(Cp,dbl,succ)": lambda: w_right_gen("Cp", dbl, succ, W=W),
        "cp_square(cst0)": lambda: cp_square(cst0, W=W),
        "cp_square(mix)": lambda: cp_square(mix, W=W),
    }
    failed = [name for name, fn in runs.items() if not fn().verified]
    detail = f"{len(runs) - len(failed)}/{len(runs)} certificates verified at W={W}"
    if failed:
        detail += f" (failed: {', '.join(failed)})"
    return report(4, not failed, time.perf_counter() - t0, 60, detail)


def criterion_5() -> bool:
    t0 = time.perf_counter()
    corpus = exhaustive_corpus(6, 4, 5000)
    mismatch = sum(enumerate_j(M) != minimal_hitting_sets(M) for M in corpus)
    bad = sum(not is_in_j(construct_h(M), M) for M in corpus)
    return report(5, mismatch == 0 and bad == 0, time.perf_counter() - t0, 5,
                  f"{len(corpus)} families, {mismatch} enumeration mismatches, {bad} construct_h failures")


def criterion_6() -> bool:
    t0 = time.perf_counter()
    rep = run_preset("sym3")
    c = rep.candidates[0] if len(rep.candidates) == 1 else None
    ok = (rep.order == 27 and rep.U_size == 18 and c is not None and len(c.H) == 18
          and c.complement_size == 9 and c.maximal and len(c.converse) == 18
          and set(c.converse.values()) == {27})
    detail = (f"|T_3|={rep.order}, |U|={rep.U_size}, candidates={len(rep.candidates)}"
              + (f", |H|={len(c.H)}, complement {c.complement_size}, maximal={c.maximal}, "
                 f"converse checks reaching 27: {sum(v == 27 for v in c.converse.values())}" if c else ""))
    return report(6, ok, time.perf_counter() - t0, 5, detail)


def stirling2(n: int, k: int) -> int:
    from math import factorial
    return sum((-1) ** i * comb(k, i) * (k - i) ** n for i in range(k + 1)) // factorial(k)


def criterion_7() -> bool:
    t0 = time.perf_counter()
    rep = run_preset("sym4")
    brute = sum(1 for m in all_maps(4) if m.rank == 3)
    formula = comb(4, 3) * stirling2(4, 3) * 6
    c = rep.candidates[0] if len(rep.candidates) == 1 else None
    ok = (rep.order == 256 and rep.U_size == brute == formula and c is not None
          and c.closed and c.maximal)
    detail = (f"|T_4|={rep.order}, |U|={rep.U_size} (brute {brute}, count {formula})"
              + (f", complement {c.complement_size} closed={c.closed} maximal={c.maximal}" if c else ""))
    return report(7, ok, time.perf_counter() - t0, 60, detail)


def criterion_8() -> bool:
    t0 = time.perf_counter()
    rng = random.Random(8)
    seen = violations = tries = 0
    while seen < 200 and tries < 100_000:
        tries += 1
        f = classify(random_term(rng, 3))
        if f["CpGenerated"] is Tri.YES:
            seen += 1
            violations += not (f["FI"] is Tri.NO and f["Inj"] is Tri.NO)
    fiber_counts = {}
    for name, a in (("cst0", cst0), ("mix", mix)):
        cert = cp_square(a, W=10_000)
        for role, t in cert.factors:
            sizes = window_report(t, 100_000).fiber_sizes
            fiber_counts[f"{name}.{role}"] = sum(1 for v in sizes.values() if v >= 10)
    ok = seen == 200 and violations == 0 and all(v >= 10 for v in fiber_counts.values())
    return report(8, ok, time.perf_counter() - t0, 30,
                  f"{seen} CpGenerated terms, {violations} violations; fibers of size >= 10 "
                  f"within 10^5: {fiber_counts}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def test_criterion_1_subadditivity():
    assert criterion_1()


def test_criterion_2_classification_table():
    assert criterion_2()


def test_criterion_3_complement_closure():
    assert criterion_3()


def test_criterion_4_witness_suite():
    assert criterion_4()


def test_criterion_5_transversal_equivalence():
    assert criterion_5()


def test_criterion_6_sandbox_t3():
    assert criterion_6()


def test_criterion_7_sandbox_t4():
    assert criterion_7()


def test_criterion_8_cp_generated():
    assert criterion_8()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
