"""Finite-dimensional pre/postselected systems and the direct weak value."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, OrthogonalSelection
from .numerics import HermitianMatrix, eigh

__all__ = [
    "OVERLAP_FLOOR",
    "QuantumState",
    "Observable",
    "WeakValue",
    "inner",
    "check_overlap",
    "weak_value_direct",
    "weak_moment",
    "spectral_weights",
]

# Below this |<post|pre>| the weak value is reported as undefined.
OVERLAP_FLOOR = 1e-12


class QuantumState:
    """A normalized pure state of a ``dim``-level system."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes):
        a = np.array(amplitudes, dtype=complex).reshape(-1)
        if a.size == 0:
            raise ValueError("state needs at least one amplitude")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValueError("zero vector is not a state")
        a = a / norm
        a.flags.writeable = False
        self._amps = a

    @property
    def dim(self) -> int:
        return self._amps.size

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    def __eq__(self, other):
        if not isinstance(other, QuantumState):
            return NotImplemented
        return np.array_equal(self._amps, other._amps)

    def __hash__(self):
        return hash(self._amps.tobytes())

    def __repr__(self):
        return f"QuantumState({self._amps.tolist()!r})"


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: HermitianMatrix

    def __post_init__(self):
        if not isinstance(self.matrix, HermitianMatrix):
            object.__setattr__(self, "matrix", HermitianMatrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """``(eigenvalues, eigenvectors)`` from the Jacobi solver."""
        return eigh(self.matrix)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.spectrum[0])))


@dataclass(frozen=True)
class WeakValue:
    value: complex
    overlap: complex

    def __post_init__(self):
        if abs(self.overlap) == 0:
            raise OrthogonalSelection("weak value needs a non-zero overlap")

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


def inner(a: QuantumState, b: QuantumState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def check_overlap(pre: QuantumState, post: QuantumState) -> complex:
    overlap = inner(post, pre)
    if abs(overlap) < OVERLAP_FLOOR:
        raise OrthogonalSelection(
            f"|<post|pre>| = {abs(overlap):.3g} is below the overlap floor {OVERLAP_FLOOR:g}"
        )
    return overlap


def _check_dims(pre, post, obs):
    if not (pre.dim == post.dim == obs.dim):
        raise DimensionMismatch(
            f"dimensions differ: pre {pre.dim}, post {post.dim}, observable {obs.dim}"
        )


def weak_value_direct(pre: QuantumState, post: QuantumState, obs: Observable) -> WeakValue:
    """``<post|C|pre> / <post|pre>``; neither bounded by the spectrum nor real."""
    _check_dims(pre, post, obs)
    overlap = check_overlap(pre, post)
    numerator = complex(np.vdot(post.amplitudes, obs.matrix.entries @ pre.amplitudes))
    return WeakValue(numerator / overlap, overlap)


def spectral_weights(pre: QuantumState, post: QuantumState, obs: Observable):
    """Eigenvalues ``c_k`` and coefficients ``a_k = <post|k><k|pre>``.

    The coefficients sum to ``<post|pre>``.
    """
    _check_dims(pre, post, obs)
    values, vectors = obs.spectrum
    a = (vectors.conj().T @ post.amplitudes).conj() * (vectors.conj().T @ pre.amplitudes)
    return values, a


def weak_moment(pre: QuantumState, post: QuantumState, obs: Observable, n: int) -> complex:
    """``(C**n)_w`` through the spectral decomposition of ``C``."""
    if n < 0 or n > 20:
        raise ValueError(f"moment order must lie in [0, 20], got {n}")
    overlap = check_overlap(pre, post)
    values, a = spectral_weights(pre, post, obs)
    return complex(np.sum(a * values.astype(complex) ** n) / overlap)
