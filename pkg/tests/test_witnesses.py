import pytest

from maxsub.canon import cst0, dbl, half, ident, mix, pred, succ
from maxsub.engine import Tri, classify, window_report
from maxsub.epset import EPSet
from maxsub.pairing import pair
from maxsub.rca import transversal
from maxsub.terms import ColProj, Lazy, Rca, compose, evaluator, parse_term, serialize, term_eval
from maxsub.witnesses import (NoInfiniteClass, PreconditionViolation, cp_square, w_cp, w_dual, w_inj,
                              w_left_gen_fi, w_right_gen, w_sur, w_sym_from_inj)

W = 2000


def vals(t, n=40):
    f = evaluator(t)
    return [f(x) for x in range(n)]


def test_w_inj():
    c = w_inj(succ, dbl, W=W)
    assert c.verified
    assert vals(c.factor("gamma")) == [0] + [2 * (n - 1) for n in range(1, 40)]
    c = w_inj(dbl, dbl, W=W)
    g = c.factor("gamma")
    assert c.verified and classify(g)["Inj"] is Tri.NO
    assert vals(g) == [n if n % 2 == 0 else 0 for n in range(40)]
    with pytest.raises(PreconditionViolation):
        w_inj(half, dbl)


def test_w_sur():
    c = w_sur(half, pred, W=W)
    assert c.verified and vals(c.factor("delta")) == [2 * max(n - 1, 0) for n in range(40)]
    c = w_sur(half, half, W=W)
    assert c.verified and vals(c.factor("delta")) == [2 * (n // 2) for n in range(40)]
    assert classify(c.factor("delta"))["Sur"] is Tri.NO
    with pytest.raises(PreconditionViolation):
        w_sur(succ, pred)


def test_w_cp():
    c = w_cp(ColProj(), ColProj(), W=W)
    assert c.verified
    assert vals(c.factor("gamma")) == list(range(40)) and vals(c.factor("delta")) == list(range(40))
    c = w_cp(ColProj(), compose(ColProj(), succ), W=W)
    assert c.verified and vals(c.factor("delta")) == [y + 1 for y in range(40)]
    with pytest.raises(PreconditionViolation):
        w_cp(dbl, ColProj())


def test_w_dual():
    c = w_dual("IF", half, half, W=W)
    assert c.verified
    assert vals(c.factor("gamma")) == [2 * (n // 2) for n in range(40)]
    assert vals(c.factor("delta")) == list(range(40))
    c = w_dual("FI", dbl, dbl, W=W)
    assert c.verified
    assert vals(c.factor("gamma")) == list(range(40))
    assert vals(c.factor("delta")) == [2 * (n // 2) for n in range(40)]
    with pytest.raises(PreconditionViolation):
        w_dual("IF", dbl, half)


def test_w_dual_gamma_image_is_transversal():
    c = w_dual("IF", half, half, W=W)
    g = evaluator(c.factor("gamma"))
    img = {g(n) for n in range(W)}
    trans = transversal(half.map)
    assert {y for y in range(W // 2) if y in trans} <= img
    assert all(y in trans for y in img)


def test_w_sym_from_inj():
    c = w_sym_from_inj(succ, ident, W=W)
    assert c.verified and vals(c.factor("gamma")) == [0] + list(range(39))
    c = w_sym_from_inj(dbl, ident, W=W)
    assert c.verified and vals(c.factor("gamma")) == [n // 2 if n % 2 == 0 else n for n in range(40)]
    with pytest.raises(PreconditionViolation):
        w_sym_from_inj(half, ident)


def test_w_left_gen_fi():
    c = w_left_gen_fi(ColProj(), dbl, W=W)
    assert c.verified and vals(c.factor("gamma")) == [pair(2 * n, 0) for n in range(40)]
    c = w_left_gen_fi(ColProj(), succ, W=W)
    assert c.verified and vals(c.factor("gamma")) == [pair(n + 1, 0) for n in range(40)]
    with pytest.raises(PreconditionViolation):
        w_left_gen_fi(ColProj(), half)


def test_w_right_gen():
    c = w_right_gen("IF", dbl, succ, W=W)
    g = vals(c.factor("gamma"))
    assert c.verified and g[0::2] == [q + 1 for q in range(20)] and set(g[1::2]) <= set(range(40))
    assert classify(c.factor("gamma"))["IF"] is Tri.YES
    c = w_right_gen("Cp", dbl, succ, W=W)
    g = vals(c.factor("gamma"))
    assert c.verified and g[0::2] == [k + 1 for k in range(20)]
    assert g[1] == 1 and g[3] == 2
    with pytest.raises(PreconditionViolation):
        w_right_gen("IF", half, succ)


def test_cp_square():
    for a in (cst0, mix):
        c = cp_square(a, W=W)
        assert c.verified
        assert all(f.actual is Tri.YES for f in c.flags)
    with pytest.raises(NoInfiniteClass):
        cp_square(dbl)


def test_cp_square_fibers_grow():
    c = cp_square(mix, W=W)
    for role in ("beta1", "beta2"):
        rep = window_report(c.factor(role), 100_000)
        assert sum(1 for v in rep.fiber_sizes.values() if v >= 10) >= 10


def test_certificate_rechecked_independently():
    c = w_cp(ColProj(), compose(ColProj(), succ), W=500)
    gamma, delta = c.factor("gamma"), c.factor("delta")
    beta = compose(ColProj(), succ)
    assert all(term_eval(delta, term_eval(ColProj(), term_eval(gamma, n))) == term_eval(beta, n)
               for n in range(500))


def test_certificate_reports_are_deterministic():
    a = w_right_gen("Cp", dbl, succ, W=500)
    b = w_right_gen("Cp", dbl, succ, W=500)
    assert a.to_text() == b.to_text() and a.to_json() == b.to_json()
    assert "W = 500" in a.to_text()
    for _, t in a.factors:
        assert parse_term(serialize(t)) == t


def test_failed_identity_is_reported_not_raised():
    from maxsub.witnesses import certify
    c = certify("bogus", [("gamma", succ)], succ, dbl, "succ = dbl", [("gamma", "Inj", Tri.YES)], W=10)
    assert not c.verified and c.first_mismatch == 0
    assert "fails at n=0" in c.to_text()
