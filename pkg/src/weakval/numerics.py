"""Numeric substrate: a two-infinitesimal dual algebra, a Jacobi eigensolver,
Gaussian moments and a mixed finite-difference stencil.

Scalars are plain Python ``complex`` values.  ``DualBi`` extends them with two
nilpotent infinitesimals ``eq`` (pointer) and ``eb`` (width) obeying
``eq**2 == eb**2 == 0`` while ``eq*eb`` survives, so one evaluation of a
function yields its value, both first derivatives and the mixed derivative.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from numbers import Number
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "DualBi",
    "HermitianMatrix",
    "dual_mul",
    "dual_apply",
    "dual_pow",
    "eigh",
    "gaussian_moment",
    "mixed_fd",
    "exp",
    "ln",
    "sin",
    "cos",
    "tan",
    "sqrt",
    "power",
]


@dataclass(frozen=True)
class DualBi:
    """``v + dQ*eq + dB*eb + dQB*eq*eb`` with complex coefficients."""

    v: complex = 0j
    dQ: complex = 0j
    dB: complex = 0j
    dQB: complex = 0j

    def __post_init__(self):
        for name in ("v", "dQ", "dB", "dQB"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def lift(cls, x) -> DualBi:
        if isinstance(x, DualBi):
            return x
        return cls(complex(x))

    @classmethod
    def seed_q(cls, value=0.0) -> DualBi:
        return cls(value, 1.0, 0.0, 0.0)

    @classmethod
    def seed_beta(cls, value=0.0) -> DualBi:
        return cls(value, 0.0, 1.0, 0.0)

    def parts(self) -> tuple[complex, complex, complex, complex]:
        return (self.v, self.dQ, self.dB, self.dQB)

    @property
    def is_constant(self) -> bool:
        return self.dQ == 0 and self.dB == 0 and self.dQB == 0

    def __add__(self, other):
        if isinstance(other, DualBi):
            return DualBi(self.v + other.v, self.dQ + other.dQ,
                          self.dB + other.dB, self.dQB + other.dQB)
        if isinstance(other, Number):
            return DualBi(self.v + other, self.dQ, self.dB, self.dQB)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return DualBi(-self.v, -self.dQ, -self.dB, -self.dQB)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (DualBi, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Number):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, DualBi):
            return dual_mul(self, other)
        if isinstance(other, Number):
            return DualBi(self.v * other, self.dQ * other,
                          self.dB * other, self.dQB * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualBi):
            return dual_mul(self, dual_apply("recip", other))
        if isinstance(other, Number):
            if other == 0:
                raise DomainError("division by zero")
            return DualBi(self.v / other, self.dQ / other,
                          self.dB / other, self.dQB / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return dual_apply("recip", self) * other
        return NotImplemented

    def __pow__(self, p):
        return power(self, p)

    def __rpow__(self, base):
        return power(base, self)

    def __abs__(self):
        return abs(self.v)


def dual_mul(a: DualBi, b: DualBi) -> DualBi:
    """Truncated product keeping the {1, eq, eb, eq*eb} components."""
    return DualBi(
        a.v * b.v,
        a.v * b.dQ + a.dQ * b.v,
        a.v * b.dB + a.dB * b.v,
        a.v * b.dQB + a.dQB * b.v + a.dQ * b.dB + a.dB * b.dQ,
    )


def _chain(a: DualBi, f0, f1, f2) -> DualBi:
    return DualBi(
        f0,
        f1 * a.dQ,
        f1 * a.dB,
        f1 * a.dQB + f2 * a.dQ * a.dB,
    )


def _derivs_exp(x):
    e = cmath.exp(x)
    return e, e, e


def _derivs_ln(x):
    if x == 0:
        raise DomainError("ln(0)")
    return cmath.log(x), 1 / x, -1 / (x * x)


def _derivs_sin(x):
    s, c = cmath.sin(x), cmath.cos(x)
    return s, c, -s


def _derivs_cos(x):
    s, c = cmath.sin(x), cmath.cos(x)
    return c, -s, -c


def _derivs_tan(x):
    c = cmath.cos(x)
    if c == 0:
        raise DomainError("tan at a pole")
    t = cmath.sin(x) / c
    sec2 = 1 / (c * c)
    return t, sec2, 2 * t * sec2


def _derivs_sqrt(x):
    if x == 0:
        raise DomainError("sqrt is not differentiable at 0")
    s = cmath.sqrt(x)
    return s, 0.5 / s, -0.25 / (s * x)


def _derivs_recip(x):
    if x == 0:
        raise DomainError("division by zero")
    r = 1 / x
    return r, -r * r, 2 * r * r * r


_PRIMITIVES: dict[str, Callable] = {
    "exp": _derivs_exp,
    "ln": _derivs_ln,
    "sin": _derivs_sin,
    "cos": _derivs_cos,
    "tan": _derivs_tan,
    "sqrt": _derivs_sqrt,
    "recip": _derivs_recip,
}


def dual_apply(f: str, a: DualBi) -> DualBi:
    """Apply the analytic primitive named ``f`` to ``a`` by the chain rule.

    The mixed coefficient picks up ``f''(v) * dQ * dB`` in addition to the
    first-order term, which is what makes the mixed derivative exact.
    """
    try:
        derivs = _PRIMITIVES[f]
    except KeyError:
        raise ValueError(f"unsupported primitive {f!r}") from None
    return _chain(a, *derivs(a.v))


def dual_pow(a: DualBi, p) -> DualBi:
    """``a**p`` for a constant exponent, principal branch."""
    p = complex(p)
    if a.v == 0:
        if p.imag == 0 and p.real == int(p.real) and p.real >= 0:
            return _ipow(a, int(p.real))
        raise DomainError("non-integer power of 0")
    f0 = cmath.exp(p * cmath.log(a.v))
    return _chain(a, f0, p * f0 / a.v, p * (p - 1) * f0 / (a.v * a.v))


def _ipow(x, n: int):
    if n < 0:
        if _is_zero(x):
            raise DomainError("division by zero")
        return 1 / _ipow(x, -n)
    result = 1
    base = x
    while n:
        if n & 1:
            result = base * result
        n >>= 1
        if n:
            base = base * base
    return result


def _is_zero(x) -> bool:
    if isinstance(x, DualBi):
        return x.v == 0
    if isinstance(x, np.ndarray):
        return bool(np.any(x == 0))
    return x == 0


def _integral_value(p):
    """Return ``p`` as an int when it is an exactly integral real constant."""
    if isinstance(p, DualBi):
        if not p.is_constant:
            return None
        p = p.v
    if isinstance(p, np.ndarray):
        return None
    if isinstance(p, (int, np.integer)):
        return int(p)
    p = complex(p)
    if p.imag == 0 and math.isfinite(p.real) and p.real == int(p.real):
        return int(p.real)
    return None


def power(x, p):
    """``x**p``: repeated multiplication for integral exponents, otherwise
    the principal branch ``exp(p*ln(x))``."""
    n = _integral_value(p)
    if n is not None:
        return _ipow(x, n)
    if isinstance(p, DualBi):
        return exp(p * ln(x))
    if isinstance(x, DualBi):
        return dual_pow(x, p)
    if isinstance(x, np.ndarray) or isinstance(p, np.ndarray):
        return np.power(np.asarray(x, dtype=complex), p)
    if x == 0:
        raise DomainError("non-integer power of 0")
    return cmath.exp(complex(p) * cmath.log(x))


def _dispatch(name: str, np_fn, cm_fn):
    def fn(x):
        if isinstance(x, DualBi):
            return dual_apply(name, x)
        if isinstance(x, np.ndarray):
            return np_fn(x.astype(complex, copy=False))
        try:
            return cm_fn(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"{name}({x!r}): {exc}") from None

    fn.__name__ = name
    fn.__doc__ = f"Generic {name} over complex, ndarray and DualBi arguments."
    return fn


def _cm_ln(x):
    if x == 0:
        raise DomainError("ln(0)")
    return cmath.log(x)


def _cm_tan(x):
    if cmath.cos(x) == 0:
        raise DomainError("tan at a pole")
    return cmath.tan(x)


exp = _dispatch("exp", np.exp, cmath.exp)
ln = _dispatch("ln", np.log, _cm_ln)
sin = _dispatch("sin", np.sin, cmath.sin)
cos = _dispatch("cos", np.cos, cmath.cos)
tan = _dispatch("tan", np.tan, _cm_tan)
sqrt = _dispatch("sqrt", np.sqrt, cmath.sqrt)


# --- Hermitian matrices and the Jacobi eigensolver -------------------------

HERMITIAN_TOL = 1e-12


class HermitianMatrix:
    """Immutable complex Hermitian matrix.

    Construction checks ``m[j, k] == conj(m[k, j])`` to ``HERMITIAN_TOL``
    (scaled by the largest entry when that exceeds 1) and then stores the
    exactly Hermitian part.
    """

    __slots__ = ("_m",)

    def __init__(self, entries):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(m))))
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > HERMITIAN_TOL * scale:
            raise ValueError(f"matrix is not Hermitian (max |m - m^H| = {defect:.3g})")
        m = 0.5 * (m + m.conj().T)
        m.flags.writeable = False
        self._m = m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._m

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"HermitianMatrix({self._m.tolist()!r})"


def eigh(m: HermitianMatrix, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ascending real eigenvalues and a unitary matrix whose columns are
    the corresponding eigenvectors.  Sweeps stop once every off-diagonal
    magnitude is below ``1e-14 * ||m||_F``.
    """
    if not isinstance(m, HermitianMatrix):
        m = HermitianMatrix(m)
    a = np.array(m.entries, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(a))
    tol = 1e-14 * norm

    if n > 1 and norm > 0:
        for _ in range(max_sweeps):
            off = np.abs(a - np.diag(np.diag(a)))
            if off.max() < tol:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    mag = abs(apq)
                    if mag < tol:
                        continue
                    phase = apq / mag
                    app, aqq = a[p, p].real, a[q, q].real
                    theta = (aqq - app) / (2.0 * mag)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    # phase-align column q, then a real rotation in (p, q)
                    j = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                    idx = [p, q]
                    a[:, idx] = a[:, idx] @ j
                    a[idx, :] = j.conj().T @ a[idx, :]
                    a[p, q] = a[q, p] = 0.0
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    v[:, idx] = v[:, idx] @ j
        else:
            off = np.abs(a - np.diag(np.diag(a)))
            if off.max() >= tol:
                raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


# --- Gaussian moments -------------------------------------------------------

def gaussian_moment(m: int) -> float:
    """Return the integral of ``x**m * exp(-x**2)`` over the real line."""
    if m < 0 or m > 40 or int(m) != m:
        raise ValueError(f"moment order must be an integer in [0, 40], got {m}")
    if m % 2:
        return 0.0
    value = math.sqrt(math.pi)
    for k in range(2, m + 1, 2):
        value *= (k - 1) / 2
    return value


# --- finite differences -----------------------------------------------------

def _eval_nonzero(f, q, b) -> complex:
    val = complex(f(q, b))
    if val == 0 or not cmath.isfinite(val):
        raise DomainError(f"cannot take log of f({q}, {b}) = {val}")
    return val


def mixed_fd(f: Callable, h_q: float = 1e-4, h_beta: float = 1e-4,
             beta0: float = 0.0) -> complex:
    """Finite-difference estimate of d/dbeta d/dQ ln f at (Q=0, beta=beta0).

    Central differences in Q; in beta a one-sided forward difference (the
    evaluation point may sit on the boundary beta=0) combined over steps
    ``h_beta`` and ``h_beta/2`` by Richardson extrapolation.
    """
    if beta0 < 0:
        raise ValueError("beta0 must be non-negative")

    def dq(b):
        # log of the ratio stays clear of the branch cut
        ratio = _eval_nonzero(f, h_q, b) / _eval_nonzero(f, -h_q, b)
        return cmath.log(ratio) / (2 * h_q)

    g0 = dq(beta0)
    d_full = (dq(beta0 + h_beta) - g0) / h_beta
    d_half = (dq(beta0 + h_beta / 2) - g0) / (h_beta / 2)
    return 2 * d_half - d_full
