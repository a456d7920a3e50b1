"""Gaussian pointer states and the detector wavefunction after postselection.

The von Neumann coupling with unit impulse translates the pointer by each
eigenvalue of the measured observable, so in position representation the
postselected detector wave is (up to a constant)

    psi(Q) = sum_k a_k exp(-beta (Q - c_k)**2 / 2),   a_k = <post|k><k|pre>.

Everything here is unnormalized unless stated otherwise; that form stays
analytic at beta = 0, where weak values are extracted.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .numerics import DualBi, exp, gaussian_moment
from .quantum import (
    Observable,
    QuantumState,
    check_overlap,
    spectral_weights,
    weak_moment,
)

__all__ = [
    "GaussianPointer",
    "PostselectedWave",
    "SampleTable",
    "synthesize_postselected",
    "av_series_term",
    "av_series_wavefunction",
    "grid_evaluate",
    "default_grid",
    "normalized_distance",
    "write_text_atomic",
]


@dataclass(frozen=True)
class GaussianPointer:
    """Detector ground state of width ``beta**-0.5``."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"pointer width parameter must be positive, got {self.beta}")

    @property
    def width(self) -> float:
        return self.beta ** -0.5

    def __call__(self, q):
        return (self.beta / math.pi) ** 0.25 * np.exp(-self.beta * np.asarray(q) ** 2 / 2)

    def unnormalized(self, q, beta=None):
        beta = self.beta if beta is None else beta
        return exp(-beta * q * q / 2)


@dataclass(frozen=True, eq=False)
class PostselectedWave:
    """``sum_k a_k exp(-beta (Q - c_k)**2 / 2)``.

    Calling ``wave(Q)`` uses the stored ``beta``; ``wave(Q, beta)`` overrides
    it, which is how the extraction code seeds infinitesimal widths.  ``Q`` and
    ``beta`` may be floats, complex numbers, numpy arrays or ``DualBi``.
    """

    coefficients: tuple
    shifts: tuple
    beta: float

    def __post_init__(self):
        coeffs = tuple(complex(a) for a in self.coefficients)
        shifts = tuple(float(c) for c in self.shifts)
        if len(coeffs) != len(shifts) or not coeffs:
            raise ValueError("coefficients and shifts must be non-empty and equally long")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "shifts", shifts)

    @property
    def overlap(self) -> complex:
        return sum(self.coefficients)

    @property
    def max_shift(self) -> float:
        return max(abs(c) for c in self.shifts)

    @property
    def weakness(self) -> float:
        """Dimensionless ``beta * max|c_k|**2``."""
        return self.beta * self.max_shift ** 2

    def __call__(self, q, beta=None):
        beta = self.beta if beta is None else beta
        if isinstance(q, np.ndarray) and not isinstance(beta, DualBi):
            q = q.astype(float, copy=False)
            total = np.zeros(q.shape, dtype=complex)
            for a, c in zip(self.coefficients, self.shifts):
                total += a * np.exp(-beta * (q - c) ** 2 / 2)
            return total
        total = 0
        for a, c in zip(self.coefficients, self.shifts):
            d = q - c
            total = total + a * exp(-(beta * (d * d)) / 2)
        return total

    def scaled(self, factor: complex) -> PostselectedWave:
        return PostselectedWave(tuple(factor * a for a in self.coefficients), self.shifts, self.beta)

    def with_beta(self, beta: float) -> PostselectedWave:
        return PostselectedWave(self.coefficients, self.shifts, beta)


def synthesize_postselected(pre: QuantumState, post: QuantumState, obs: Observable,
                            beta: float) -> PostselectedWave:
    check_overlap(pre, post)
    values, a = spectral_weights(pre, post, obs)
    return PostselectedWave(tuple(a), tuple(values), beta)


def _moment_integral(n: int, y):
    """Integral of ``(x + y)**n exp(-x**2)`` dx, expanded binomially."""
    total = 0
    for m in range(0, n + 1, 2):
        total = total + comb(n, m) * gaussian_moment(m) * y ** (n - m)
    return total


def av_series_term(pre, post, obs, beta: float, q, n: int, *, weak=None):
    """The order-``n`` correction of the Aharonov-Vaidman expansion (n >= 2)."""
    if n < 2:
        raise ValueError("correction terms start at n = 2")
    cw = weak_moment(pre, post, obs, 1) if weak is None else weak
    q = np.asarray(q, dtype=float)
    y = 1j * math.sqrt(beta) * q / math.sqrt(2)
    coeff = (weak_moment(pre, post, obs, n) - cw ** n) / (factorial(n) * math.sqrt(math.pi))
    coeff *= (-math.sqrt(2 * beta) * 1j) ** n
    return np.exp(-beta * q ** 2 / 2) * coeff * _moment_integral(n, y)


def av_series_wavefunction(pre, post, obs, beta: float, q, order: int):
    """Truncated expansion: the Gaussian shifted by the weak value plus the
    corrections of orders 2..``order``.

    Summed to all orders it equals ``synthesize_postselected(...)(q) / <post|pre>``.
    """
    if not 1 <= order <= 20:
        raise ValueError(f"order must lie in [1, 20], got {order}")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    cw = weak_moment(pre, post, obs, 1)
    q = np.asarray(q, dtype=float)
    out = np.exp(-beta * (q - cw) ** 2 / 2)
    for n in range(2, order + 1):
        out = out + av_series_term(pre, post, obs, beta, q, n, weak=cw)
    return out


class SampleTable:
    """Wavefunction samples on a uniform grid."""

    def __init__(self, q, values):
        self.q = np.asarray(q, dtype=float)
        self.values = np.broadcast_to(np.asarray(values, dtype=complex), self.q.shape).copy()
        self.q.flags.writeable = False
        self.values.flags.writeable = False

    def __len__(self):
        return self.q.size

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm2(self) -> float:
        """Trapezoid estimate of the integral of ``|psi|**2``."""
        return float(np.trapezoid(self.abs2, self.q))

    def mean(self) -> float:
        """Mean pointer position under the density ``|psi|**2``."""
        d = self.abs2
        return float(np.trapezoid(self.q * d, self.q) / np.trapezoid(d, self.q))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Q", "re", "im", "abs2"])
        for q, v, p in zip(self.q, self.values, self.abs2):
            w.writerow([f"{q:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{p:.17g}"])
        return buf.getvalue()


def grid_evaluate(wave, q_min: float, q_max: float, n_points: int) -> SampleTable:
    """Sample ``wave(Q)`` on ``n_points`` evenly spaced points, endpoints included."""
    if not q_min < q_max:
        raise ValueError("q_min must be below q_max")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    q = np.linspace(q_min, q_max, n_points)
    values = wave(q)
    if np.ndim(values) == 0:
        values = np.full(q.shape, complex(values))
    return SampleTable(q, values)


def default_grid(beta: float, max_shift: float, points: int = 2001) -> tuple[float, float, int]:
    """Grid spanning six widths around every shifted Gaussian."""
    span = 6 * (beta ** -0.5 + max_shift) if beta > 0 else 6 * max(max_shift, 1.0)
    return -span, span, points


def normalized_distance(u, v, q) -> float:
    """L2 distance between ``u`` and ``v`` after normalizing both on the grid
    ``q`` and aligning their global phase (the two are compared as rays)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nu = math.sqrt(np.trapezoid(np.abs(u) ** 2, q))
    nv = math.sqrt(np.trapezoid(np.abs(v) ** 2, q))
    if nu == 0 or nv == 0:
        raise ValueError("cannot normalize a vanishing wavefunction")
    u = u / nu
    v = v / nv
    ov = np.trapezoid(np.conj(v) * u, q)
    phase = ov / abs(ov) if ov != 0 else 1.0
    return float(math.sqrt(np.trapezoid(np.abs(u - phase * v) ** 2, q)))


def write_text_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".weakval-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
