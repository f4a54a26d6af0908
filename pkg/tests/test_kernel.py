from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracles as orc
from uslope import kernel as K
from uslope import opmatrices as O
from uslope.valuation import INF, PreconditionError, Scalar, format_val

SQ = Scalar.parse


@pytest.mark.parametrize("s,case,r", [
    ("0", "SInZ2Generic", Fraction(1, 3)),
    ("1/3", "SInZ2Generic", Fraction(1, 3)),
    ("1/4*sqrt2", "BetaNonpositive", Fraction(5, 24)),
    ("3/4*sqrt2", "BetaNonpositive", Fraction(5, 24)),
    ("1/2*sqrt2", "BetaFinitePositive", Fraction(13, 48)),
    ("1+sqrt2", "BetaFinitePositive", Fraction(29, 96)),
    ("-1/3", "WeightIn4N", Fraction(1, 3)),
    ("-1", "WeightIn4N", Fraction(1, 3)),
])
def test_classify_cases(s, case, r):
    cl = K.classify(SQ(s))
    assert (cl.case, cl.r_critical) == (case, r)


@pytest.mark.parametrize("s", ["0", "1/4*sqrt2", "1+sqrt2", "1/2*sqrt2", "3/4*sqrt2", "1/3"])
def test_critical_radius_from_definition(s):
    s = SQ(s)
    b = orc.beta_bruteforce(2 * s.a, 2 * s.b, depth=12)
    assert K.classify(s).r_critical == (3 + orc.nu_definition(b)) / 12


def test_excluded_unit_shift():
    cl = K.classify(SQ("1/2"))
    assert cl.case == "ExcludedUnit" and cl.r_critical is None
    assert cl.shifted_s == SQ("2/3") and cl.shifted_case == "SInZ2Generic"
    assert "shifted_s" in cl.to_json()


@given(st.integers(-20, 20).map(lambda k: Fraction(2 * k + 1, 2)).filter(lambda x: abs(x) < 4))
def test_every_unit_2s_is_excluded(s):
    assert K.classify(Scalar(s)).case == "ExcludedUnit"


def test_classify_rejects_large_s():
    with pytest.raises(PreconditionError, match="v\\(s\\) > -2"):
        K.classify(SQ("1/4+1/4*sqrt2"))


@given(st.sampled_from(["0", "1/3", "1/4*sqrt2", "1+sqrt2", "2+2*sqrt2", "5/7"]).map(SQ),
       st.integers(2, 60).flatmap(lambda i: st.tuples(st.just(i), st.integers(0, i))),
       st.sampled_from(["W", "Wprime"]))
def test_valtable_matches_entry_valuation(s, ij, kind):
    i, j = ij
    r = K.classify(s).r_critical
    assert K._ValTable(kind, i, s, r)(j) == O.entry_valuation(kind, i, j, s, r)


def test_nondecay_beta_nonpositive():
    rep = K.nondecay_report(SQ("1/4*sqrt2"), 8)
    assert rep.ok and [row.v_eta_i1 for row in rep.rows] == [1] * 8


def test_nondecay_beta_finite_positive():
    rep = K.nondecay_report(SQ("1+sqrt2"), 8)
    assert rep.case == "BetaFinitePositive"
    assert rep.ok
    assert rep.to_json()["rows"][0]["n"] == 1


def test_nondecay_s_in_z2_rows():
    rep = K.nondecay_report(Scalar(0), 12)
    assert rep.rows and rep.rows[0].n == 1
    assert [row.c2_i for row in rep.rows] == sorted({row.c2_i for row in rep.rows})
    assert all(row.v_eta_i1 in (0, 1) for row in rep.rows)


def test_nondecay_rejects_excluded():
    with pytest.raises(PreconditionError):
        K.nondecay_report(SQ("1/2"), 5)
    with pytest.raises(PreconditionError):
        K.nondecay_report(SQ("-1"), 5)


@pytest.mark.parametrize("u", [0, 1, 4, Fraction(1, 3), 7])
def test_fn_valuation_scan(u):
    out = K.lemma68_scan(u, 8)
    assert out["ok"]
    for row in out["rows"]:
        size = 2 ** row["n"]
        direct = sum(orc.val_parts(Fraction(u) + size + tau) for tau in range(size))
        assert row["v"] == direct


@pytest.mark.parametrize("s", ["0", "1/4*sqrt2", "1+sqrt2", "1/3"])
@pytest.mark.parametrize("kind", ["W", "Wprime"])
def test_involution(s, kind):
    assert K.involution_check(SQ(s), 24, Fraction(1, 12), kind=kind)


@pytest.mark.parametrize("s", ["0", "1/4*sqrt2", "1+sqrt2", "2/3"])
@pytest.mark.parametrize("kind", ["W", "Wprime"])
def test_witness_small(s, kind):
    s = SQ(s)
    N = 30
    wit = K.kernel_witness(s, N, kind=kind)
    assert wit.residual_zero and wit.residual_max_order == N - 1
    b = [wit.b[i] for i in range(N)]
    assert b[1] == 1
    # independent residual with closed-form entries
    for i in range(N):
        acc = b[i] + sum((O.entry(kind, i, j, s, 0).value() * b[j] for j in range(i + 1)), Scalar(0))
        assert acc == 0
    fast = K.kernel_witness(s, N, kind=kind, check_residual=False)
    assert fast.b == wit.b and fast.residual_zero is None


@pytest.mark.parametrize("s", ["0", "1/4*sqrt2", "1/3"])
def test_untwisted_form_has_odd_support(s):
    wit = K.kernel_witness(SQ(s), 40, check_residual=False)
    G = K.untwisted_q_expansion(wit, 30)
    assert G.coeffs[1] == 1
    assert all(not c for c in G.coeffs[0::2])


def test_witness_sigma_rows():
    wit = K.kernel_witness(Scalar(0), 70)
    assert [row["i"] for row in wit.rows] == [3, 5, 9, 17, 33, 65]
    for row in wit.rows:
        v = orc.val_scalar(wit.b[row["i"]])
        assert row["v_b"] == v and row["sigma"] == v - 4 * row["i"] and row["sigma_prime"] == v - row["i"]
    assert wit.sigma_prime_increasing
    js = wit.to_json()
    assert js["rows"][0]["v_b"] == format_val(wit.rows[0]["v_b"])


def test_witness_guards():
    with pytest.raises(PreconditionError):
        K.kernel_witness(Scalar(0), 5)
    with pytest.raises(PreconditionError):
        K.kernel_witness(SQ("1/2"), 20)
    wit = K.kernel_witness(Scalar(0), 12, check_residual=False)
    with pytest.raises(PreconditionError):
        K.untwisted_q_expansion(wit, 20)


def test_witness_valuations_finite():
    wit = K.kernel_witness(SQ("1/4*sqrt2"), 40, check_residual=False)
    assert all(row["v_b"] != INF for row in wit.rows)
