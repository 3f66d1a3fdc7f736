import random
from itertools import islice

import pytest
from hypothesis import given, settings, strategies as st

from _gen import random_rca, random_term
from maxsub.canon import NAMED, colembed, colproj, cst0, dbl, half, ident, mix, pred, succ
from maxsub.engine import (EXCLUSIONS, FLAG_NAMES, Bounds, Tri, class_index, classify, fiber_stream,
                           term_invariants, window_contradictions, window_report)
from maxsub.extnat import INF, ZERO, Fin
from maxsub.terms import (ColEmbed, ColProj, Compose, ParseError, Rca, compose, parse_term, serialize,
                          term_eval, evaluator)


def test_eval_examples():
    assert term_eval(ColProj(), 3) == 2
    assert term_eval(ColEmbed(), 2) == 3
    assert term_eval(Compose(dbl, half), 7) == 7


def test_invariant_examples():
    r = term_invariants(dbl)
    assert (r.d.value, r.c.value, r.k.value) == (INF, ZERO, ZERO)
    r = term_invariants(Compose(ColProj(), half))
    assert r.d == Bounds.exact(ZERO) and r.c == Bounds.exact(INF) and r.k == Bounds.exact(INF)
    r = term_invariants(Compose(half, dbl))
    assert (r.c.value, r.d.value, r.k.value) == (INF, INF, ZERO)


def _yes(t):
    return {n for n, v in classify(t).items() if v is Tri.YES}


def test_classify_examples():
    assert _yes(half) == {"Sur", "IF"}
    assert _yes(ColProj()) == {"Sur", "Cp", "IF", "CpGenerated"}
    assert _yes(dbl) == {"Inj", "FI"}
    assert all(v is not Tri.UNKNOWN for _, v in classify(dbl).items())


def test_fiber_examples():
    assert list(fiber_stream(half, 3)) == [6, 7]
    assert list(islice(fiber_stream(ColProj(), 1), 3)) == [1, 4, 8]
    assert list(fiber_stream(dbl, 3)) == []


def test_fiber_stream_of_composite_is_ordered_and_exact():
    t = compose(ColProj(), half, succ)
    got = list(islice(fiber_stream(t, 3), 12))
    assert got == sorted(got)
    assert got == [n for n in range(got[-1] + 1) if term_eval(t, n) == 3]


def test_class_index_examples():
    assert class_index(ColProj(), 3) == 2
    assert [class_index(ident, n) for n in range(6)] == list(range(6))
    assert {class_index(cst0, n) for n in range(50)} == {0}


def test_window_examples():
    assert window_report(half, 1000).c_obs == 500
    assert window_report(succ, 1000).c_obs == 0
    rep = window_report(ColProj(), 15)
    assert rep.fiber_sizes[0] >= 4


def test_right_action_law():
    rng = random.Random(11)
    for _ in range(150):
        f, g = random_term(rng, 2), random_term(rng, 2)
        fg = evaluator(Compose(f, g))
        assert all(fg(n) == term_eval(g, term_eval(f, n)) for n in range(2000))


def test_bounds_are_sound_on_windows():
    rng = random.Random(12)
    for _ in range(150):
        t = random_term(rng, 3)
        r = term_invariants(t)
        for W in (50, 500, 3000):
            w = window_report(t, W)
            assert Fin(w.c_obs) <= r.c.hi
            assert Fin(w.distinct) <= r.rank.hi


def test_flag_exclusions():
    rng = random.Random(13)
    for _ in range(500):
        f = classify(random_term(rng, 3))
        for a, b in EXCLUSIONS:
            assert not (f[a] is Tri.YES and f[b] is Tri.YES)


def test_cp_generated_excludes_inj_and_fi():
    rng = random.Random(14)
    seen = 0
    for _ in range(2000):
        f = classify(random_term(rng, 3))
        if f["CpGenerated"] is Tri.YES:
            seen += 1
            assert f["FI"] is Tri.NO and f["Inj"] is Tri.NO
    assert seen > 50


def test_fi_and_if_closed_under_composition():
    rng = random.Random(15)
    counts = {"FI": 0, "IF": 0}
    for _ in range(5000):
        a, b = Rca(random_rca(rng)), Rca(random_rca(rng))
        for h in counts:
            if classify(a)[h] is Tri.YES and classify(b)[h] is Tri.YES:
                counts[h] += 1
                assert classify(Compose(a, b))[h] is Tri.YES
    assert min(counts.values()) > 20


def test_no_contradictions_for_exact_terms():
    for t in NAMED.values():
        assert window_contradictions(t, 2000) == []


# parsing ---------------------------------------------------------------

DBL_TEXT = '{"type":"rca","N":0,"m":1,"patch":[],"tails":[{"kind":"affine","a":2,"b":0}]}'


def test_parse_examples():
    assert parse_term('{"type":"colproj"}') == ColProj()
    assert parse_term(DBL_TEXT) == dbl
    with pytest.raises(ParseError) as e:
        parse_term('{"type":"rca","N":0,"m":1,"patch":[],"tails":[{"kind":"affine","a":0,"b":3}]}')
    assert "positive" in e.value.reason


def test_parse_error_offsets():
    bad = '{"type":"compose","first":{"type":"colproj"},"second":{"type":"nope"}}'
    with pytest.raises(ParseError) as e:
        parse_term(bad)
    assert e.value.offset == bad.index('{"type":"nope"}')
    with pytest.raises(ParseError) as e:
        parse_term('{"type": ')
    assert e.value.offset == 9


def test_parse_round_trip_named_and_random():
    rng = random.Random(16)
    terms = list(NAMED.values()) + [random_term(rng, 3) for _ in range(200)]
    for t in terms:
        text = serialize(t)
        back = parse_term(text)
        assert back == t and serialize(back) == text


def test_lazy_round_trip():
    from maxsub.witnesses import cp_square
    cert = cp_square(mix, W=100)
    for _, t in cert.factors:
        back = parse_term(serialize(t))
        assert back == t
        assert [term_eval(back, n) for n in range(100)] == [term_eval(t, n) for n in range(100)]


@settings(max_examples=100)
@given(st.text(max_size=40))
def test_parse_garbage_raises_parse_error(text):
    try:
        parse_term(text)
    except ParseError as e:
        assert 0 <= e.offset <= len(text.encode("utf-8"))
