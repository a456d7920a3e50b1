import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from weakval.errors import ConvergenceError, DomainError
from weakval.numerics import (
    DualBi,
    HermitianMatrix,
    dual_apply,
    dual_mul,
    eigh,
    gaussian_moment,
    mixed_fd,
    power,
)

from _helpers import random_hermitian

finite = st.floats(min_value=-3, max_value=3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
duals = st.builds(DualBi, cplx, cplx, cplx, cplx)


def parts(d):
    return tuple(d.parts())


# --- dual_mul ---------------------------------------------------------------

@pytest.mark.parametrize("a, b, expected", [
    ((0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
    ((2, 0, 0, 0), (3, 0, 0, 0), (6, 0, 0, 0)),
    ((1, 1, 0, 0), (1, 1, 0, 0), (1, 2, 0, 0)),
])
def test_dual_mul_examples(a, b, expected):
    assert parts(dual_mul(DualBi(*a), DualBi(*b))) == expected


@given(cplx, cplx)
def test_nilpotent_square(dq, db):
    x = DualBi(0, dq, db, 0)
    sq = dual_mul(x, x)
    assert sq.v == 0 and sq.dQ == 0 and sq.dB == 0
    assert cmath.isclose(sq.dQB, 2 * dq * db, abs_tol=1e-12)


@given(duals, duals, duals)
def test_mul_associative_and_commutative(a, b, c):
    ab_c = (a * b) * c
    a_bc = a * (b * c)
    for x, y in zip(ab_c.parts(), a_bc.parts()):
        assert cmath.isclose(x, y, rel_tol=1e-9, abs_tol=1e-9)
    for x, y in zip((a * b).parts(), (b * a).parts()):
        assert cmath.isclose(x, y, rel_tol=1e-12, abs_tol=1e-12)


def test_lift_has_no_infinitesimal_part():
    assert DualBi.lift(2.5).parts() == (2.5, 0, 0, 0)


@given(duals, duals.filter(lambda d: abs(d.v) > 0.1))
def test_division_round_trip(a, b):
    back = (a * b) / b
    for x, y in zip(back.parts(), a.parts()):
        assert cmath.isclose(x, y, rel_tol=1e-7, abs_tol=1e-7)


# --- dual_apply -------------------------------------------------------------

def test_exp_at_q_seed():
    assert parts(dual_apply("exp", DualBi(0, 1, 0, 0))) == (1, 1, 0, 0)


def test_ln_second_derivative_enters_mixed_part():
    assert parts(dual_apply("ln", DualBi(1, 1, 1, 0))) == (0, 1, 1, -1)


def test_exp_of_shifted_gaussian_exponent():
    q, b = DualBi.seed_q(), DualBi.seed_beta()
    d = q - 2
    r = dual_apply("exp", -(b * (d * d)) / 2)
    # frozen from a symbolic expansion of exp(-b (Q-2)^2 / 2) at (0, 0)
    assert r.parts() == (1, 0, -2, 2)


@pytest.mark.parametrize("name, point", [("ln", 0), ("recip", 0), ("sqrt", 0)])
def test_domain_errors(name, point):
    with pytest.raises(DomainError):
        dual_apply(name, DualBi(point, 1, 1, 0))


def test_division_by_zero_dual():
    with pytest.raises(DomainError):
        DualBi(1, 1) / DualBi(0, 1)
    with pytest.raises(DomainError):
        DualBi(1, 1) / 0


_SYMPY = {"exp": sp.exp, "ln": sp.log, "sin": sp.sin, "cos": sp.cos,
          "tan": sp.tan, "sqrt": sp.sqrt}


@pytest.mark.parametrize("name", sorted(_SYMPY))
def test_mixed_part_matches_symbolic_derivative(name):
    # inner function z(Q, b) = z0 + u Q + v b + w Q b, composed with f
    z0, u, v, w = 0.7 + 0.2j, 0.3 - 0.5j, -0.4 + 0.1j, 0.25j
    Q, B = sp.symbols("Q B")
    f = _SYMPY[name](sp.nsimplify(z0) + sp.nsimplify(u) * Q + sp.nsimplify(v) * B
                     + sp.nsimplify(w) * Q * B)
    at = {Q: 0, B: 0}
    expected = [complex(sp.N(e.subs(at))) for e in
                (f, sp.diff(f, Q), sp.diff(f, B), sp.diff(f, Q, B))]
    got = dual_apply(name, DualBi(z0, u, v, w)).parts()
    for g, e in zip(got, expected):
        assert cmath.isclose(g, e, rel_tol=1e-12, abs_tol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(_SYMPY)),
       st.floats(0.5, 1.0), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_dual_matches_finite_difference(name, z0, u, v, w):
    # mixed_fd differentiates ln g, so g = exp(f(z)) exposes f's mixed part
    f = {"exp": cmath.exp, "ln": cmath.log, "sin": cmath.sin, "cos": cmath.cos,
         "tan": cmath.tan, "sqrt": cmath.sqrt}[name]

    def g(q, b):
        return cmath.exp(f(z0 + u * q + v * b + w * q * b))

    dual = dual_apply(name, DualBi(z0, u, v, w)).dQB
    assert abs(dual - mixed_fd(g)) <= 1e-6


def test_power_integer_is_repeated_multiplication():
    x = DualBi(1.5, 1, 1, 0)
    assert power(x, 3).parts() == (x * x * x).parts()
    inv = power(x, -2) * x * x
    assert cmath.isclose(inv.v, 1) and abs(inv.dQ) < 1e-15 and abs(inv.dQB) < 1e-15


def test_power_fractional_principal_branch():
    assert cmath.isclose(power(-4 + 0j, 0.5), 2j)
    r = power(DualBi(4, 1, 0, 0), 0.5)
    assert cmath.isclose(r.v, 2) and cmath.isclose(r.dQ, 0.25)


# --- eigh -------------------------------------------------------------------

def test_eigh_diagonal():
    w, v = eigh(HermitianMatrix(np.diag([1.0, 2.0])))
    assert np.array_equal(w, [1.0, 2.0])
    assert np.allclose(v, np.eye(2))


def test_eigh_pauli_x():
    w, _ = eigh(HermitianMatrix([[0, 1], [1, 0]]))
    assert np.allclose(w, [-1, 1], atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_eigh_random_residual_and_reconstruction(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 5)
    w, v = eigh(HermitianMatrix(a))
    norm = np.linalg.norm(a)
    assert np.max(np.linalg.norm(a @ v - v * w, axis=0)) <= 1e-10 * norm
    assert np.linalg.norm(v.conj().T @ v - np.eye(5)) <= 1e-10
    assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - a) <= 1e-9
    # independent oracle: LAPACK eigenvalues
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * norm)


def test_eigh_degenerate_block():
    rng = np.random.default_rng(7)
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    a = u @ np.diag([1.0, 1.0, 1.0, -2.0]) @ u.conj().T
    w, v = eigh(HermitianMatrix(a))
    assert np.allclose(w, [-2, 1, 1, 1], atol=1e-12)
    assert np.allclose(a @ v, v * w, atol=1e-12)


def test_eigh_sweep_cap():
    with pytest.raises(ConvergenceError):
        eigh(HermitianMatrix([[0, 1], [1, 0]]), max_sweeps=0)


def test_hermitian_rejected():
    with pytest.raises(ValueError):
        HermitianMatrix([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        HermitianMatrix([[1, 2, 3]])


# --- gaussian_moment --------------------------------------------------------

def test_moment_examples():
    assert gaussian_moment(0) == math.sqrt(math.pi)
    assert gaussian_moment(1) == 0
    assert math.isclose(gaussian_moment(4), 0.75 * math.sqrt(math.pi), rel_tol=1e-15)


@pytest.mark.parametrize("m", [0, 2, 3, 6, 10])
def test_moment_matches_quadrature(m):
    value, _ = quad(lambda x: x ** m * math.exp(-x * x), -np.inf, np.inf)
    assert math.isclose(gaussian_moment(m), value, rel_tol=1e-9, abs_tol=1e-12)


@pytest.mark.parametrize("k", range(1, 21))
def test_moment_ratio(k):
    assert math.isclose(gaussian_moment(2 * k) / gaussian_moment(2 * k - 2),
                        (2 * k - 1) / 2, rel_tol=1e-14)


def test_moment_range():
    with pytest.raises(ValueError):
        gaussian_moment(41)


# --- mixed_fd ---------------------------------------------------------------

def test_mixed_fd_bilinear_log():
    assert abs(mixed_fd(lambda q, b: cmath.exp(q * b)) - 1) <= 1e-7


def test_mixed_fd_constant():
    assert abs(mixed_fd(lambda q, b: 5)) <= 1e-12


def test_mixed_fd_zero_value():
    with pytest.raises(DomainError):
        mixed_fd(lambda q, b: q * b)
