import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bigframe.core import (BiGFrameSystem, Verdict, biframe_operator,
                           classify, quadratic_form)
from bigframe.errors import ParseError, SpecInvalid
from bigframe.instances import (KINDS, MAX_DIM, GeneratorSpec, deserialize, deserialize_matrix,
                                example_3_4, example_3_6, random_operator, random_system,
                                serialize, serialize_matrix, tighten)
from bigframe.opkit import adjoint, douglas_factor, hermitian_residual, injectivity_margin


def e(k, n=4):
    v = np.zeros(n, complex)
    v[k] = 1
    return v


# ---------------------------------------------------------------- fixtures

def test_rank_one_fixture_operators():
    sys = example_3_4()
    assert sys.phi.subspace_dims == (1, 2, 3, 4)
    x = np.array([1 + 2j, -3, 0.5j, 7])
    # Phi_1 x = <x,e1> e1 ... Phi_4 x = 4 <x,e3> e4, inside the first i coordinates
    expect_phi = [[x[0]], [x[0], 0], [0, 0, 3 * x[1]], [0, 0, 0, 4 * x[2]]]
    expect_psi = [[x[0]], [x[0], 0], [0, 0, x[1] / 3], [0, 0, 0, x[2] / 4]]
    for op, want in zip(sys.phi, expect_phi):
        np.testing.assert_allclose(op @ x, want, atol=1e-15)
    for op, want in zip(sys.psi, expect_psi):
        np.testing.assert_allclose(op @ x, want, atol=1e-15)


def test_rank_one_fixture_k_and_adjoint():
    sys = example_3_4()
    x = np.array([1 + 2j, -3, 0.5j, 7])
    np.testing.assert_array_equal(sys.k_op @ x, np.vdot(e(0), x) * e(1))
    np.testing.assert_array_equal(adjoint(sys.k_op) @ x, np.vdot(e(1), x) * e(0))


def test_rank_one_fixture_quadratic_form():
    sys = example_3_4()
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        want = 2 * abs(x[0]) ** 2 + abs(x[1]) ** 2 + abs(x[2]) ** 2
        assert quadratic_form(sys, x) == pytest.approx(want, rel=1e-14)


def test_rank_one_fixture_classification():
    rep = classify(example_3_4())
    assert rep.verdict is Verdict.K_BI_G_FRAME
    assert (rep.a_opt, rep.b_opt) == pytest.approx((1, 2), abs=1e-12)


def test_parseval_fixture_operators():
    sys = example_3_6()
    np.testing.assert_array_equal(sys.k_op, np.eye(4))
    for i, (p, q) in enumerate(zip(sys.phi, sys.psi)):
        np.testing.assert_allclose(p, (i + 1) * e(i)[None, :], atol=0)
        np.testing.assert_allclose(q, e(i)[None, :] / (i + 1), atol=1e-17)
    rep = classify(sys)
    assert rep.verdict is Verdict.PARSEVAL
    assert np.linalg.norm(biframe_operator(sys) - np.eye(4)) <= 1e-14
    assert (rep.a_opt, rep.b_opt) == pytest.approx((1, 1), abs=1e-14)


# ---------------------------------------------------------------- generators

def test_generator_spec_validation():
    with pytest.raises(SpecInvalid):
        GeneratorSpec(MAX_DIM + 1, 2)
    with pytest.raises(SpecInvalid):
        GeneratorSpec(3, 0)
    with pytest.raises(SpecInvalid):
        GeneratorSpec(3, 2, "fancy")
    with pytest.raises(SpecInvalid):
        GeneratorSpec(3, 2, "rank_deficient_k", k_rank=4)


@pytest.mark.parametrize("kind", KINDS)
def test_generator_is_deterministic(kind):
    spec = GeneratorSpec(6, 4, kind, 123)
    assert random_system(spec) == random_system(spec)
    assert serialize(random_system(spec)) == serialize(random_system(spec))
    assert random_system(spec) != random_system(GeneratorSpec(6, 4, kind, 124))


@pytest.mark.parametrize("kind", KINDS)
def test_generator_soundness_per_kind(kind):
    for seed in range(500):
        n, m = 2 + seed % 6, 1 + seed % 4
        spec = GeneratorSpec(n, m, kind, seed, k_rank=(seed % n) + 1 if kind == "rank_deficient_k" else None)
        sys = random_system(spec)
        s = biframe_operator(sys)
        assert hermitian_residual(s) <= 1e-12
        rep = classify(sys)
        assert rep.verdict >= Verdict.BESSEL_ONLY
        if kind == "parseval":
            assert rep.verdict is Verdict.PARSEVAL
            assert rep.tight_residual <= 1e-10 * max(1.0, np.linalg.norm(s))
        elif kind == "tight":
            assert rep.verdict >= Verdict.TIGHT
        elif kind == "rank_deficient_k":
            assert rep.k_rank == spec.k_rank
        elif kind == "diagonal":
            for p in sys.phi:
                assert np.count_nonzero(p - np.diag(np.diag(p))) == 0


def test_random_operator_kinds():
    for seed in range(50):
        p = random_operator(5, "positive", seed)
        assert np.linalg.eigvalsh(p)[0] >= -1e-12
        inv = random_operator(5, "invertible", seed)
        assert np.linalg.svd(inv, compute_uv=False)[-1] >= 0.1 - 1e-12
        douglas_factor(np.eye(5), inv)
        r = random_operator(4, "rank", seed, rank=2)
        assert np.linalg.matrix_rank(r) == 2
        assert injectivity_margin(r)[1] is False
    with pytest.raises(SpecInvalid):
        random_operator(3, "rank", 0, rank=5)
    with pytest.raises(SpecInvalid):
        random_operator(3, "weird", 0)


def test_tighten_produces_requested_constant():
    k = np.diag([1.0, 2.0, 0.5])
    sys = random_system(GeneratorSpec(3, 3, "rank_deficient_k", 4))
    phi, psi = tighten(sys.phi, sys.psi, k, 0.7, 1)
    out = BiGFrameSystem(phi, psi, k)
    np.testing.assert_allclose(biframe_operator(out), 0.7 * k @ k, atol=1e-12)
    rep = classify(out)
    assert rep.verdict >= Verdict.TIGHT and rep.a_opt == pytest.approx(0.7, rel=1e-10)
    with pytest.raises(SpecInvalid):
        tighten(example_3_4().phi, example_3_4().psi, np.eye(4), 1.0, 0)


# ---------------------------------------------------------------- serialization

def test_round_trip_examples():
    for sys in (example_3_4(), example_3_6()):
        assert deserialize(serialize(sys)) == sys


@given(seed=st.integers(0, 2 ** 63 - 1), n=st.integers(1, 8), m=st.integers(1, 5),
       kind=st.sampled_from(KINDS))
@settings(max_examples=100, deadline=None)
def test_round_trip_is_bit_exact(seed, n, m, kind):
    sys = random_system(GeneratorSpec(n, m, kind, seed))
    back = deserialize(serialize(sys))
    assert back == sys
    for a, b in zip(back.phi, sys.phi):
        assert a.tobytes() == b.tobytes()


def test_serialized_layout():
    text = serialize(example_3_4()).decode()
    lines = text.split("\n")
    assert lines[:5] == ["bigframe v1", "dim 4", "count 4", "subdim 1", "phi"]
    assert lines[5] == "1 0 0 0 0 0 0 0"
    assert text.endswith("\n") and "\r" not in text


def test_comments_and_blank_lines_are_ignored():
    text = serialize(example_3_6()).decode()
    noisy = "# fixture\n\n" + text.replace("phi\n", "# member\nphi\n")
    assert deserialize(noisy) == example_3_6()


def test_matrix_round_trip():
    m = np.array([[1 + 1e-17j, np.pi], [-0.0, 1 / 3]])
    np.testing.assert_array_equal(deserialize_matrix(serialize_matrix(m)), m)


def _lines():
    return serialize(example_3_4()).decode().split("\n")


def test_parse_truncated_names_missing_section():
    lines = _lines()
    with pytest.raises(ParseError, match="K: expected 4 rows, input ended after 2"):
        deserialize("\n".join(lines[:-3]) + "\n")
    with pytest.raises(ParseError, match="missing 'K'"):
        deserialize("\n".join(lines[:lines.index("K")]) + "\n")
    with pytest.raises(ParseError, match="missing 'psi'"):
        deserialize("\n".join(lines[:lines.index("psi")]) + "\n")


def test_parse_subspace_dim_mismatch():
    lines = _lines()
    # member 3 declares 3 rows; claim 4 instead so the psi block starts early
    idx = lines.index("subdim 3")
    lines[idx] = "subdim 4"
    with pytest.raises(ParseError, match="operator 3: expected 4 rows"):
        deserialize("\n".join(lines))
    lines = _lines()
    lines[idx] = "subdim 2"
    with pytest.raises(ParseError, match="operator 3: expected 2 rows, got more"):
        deserialize("\n".join(lines))


def test_parse_entry_count_and_line_numbers():
    lines = _lines()
    lines[7] = "1 0 0 0"
    with pytest.raises(ParseError) as info:
        deserialize("\n".join(lines))
    assert info.value.line == 8
    assert str(info.value).startswith("line 8: expected 4 entries")


@pytest.mark.parametrize("text, fragment", [
    ("", "missing 'bigframe v1'"),
    ("bigframe v2\n", "expected 'bigframe v1'"),
    ("bigframe v1\ndim x\n", "not an integer"),
    ("bigframe v1\ndim 0\n", "must be positive"),
    ("bigframe v1\ndim 99\n", "exceeds"),
    ("bigframe v1\ndim 1\ncount 1\nsubdim 1\nphi\nnan 0\n", "non-finite"),
])
def test_parse_header_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        deserialize(text)


def test_parse_trailing_content():
    with pytest.raises(ParseError, match="trailing content"):
        deserialize(serialize(example_3_6()) + b"extra\n")


def test_parse_rejects_non_utf8():
    with pytest.raises(ParseError):
        deserialize(b"\xff\xfe")
