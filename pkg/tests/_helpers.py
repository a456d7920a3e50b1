import numpy as np

from weakval import Observable, QuantumState


def random_hermitian(rng, dim, radius=None):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    if radius is not None:
        h *= radius / np.max(np.abs(np.linalg.eigvalsh(h)))
    return h


def random_state(rng, dim):
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def random_system(rng, dim, radius=3.0, min_overlap=1e-3):
    """Random (pre, post, obs) with |<post|pre>| >= min_overlap."""
    obs = Observable(random_hermitian(rng, dim, radius * rng.uniform(0.2, 1.0)))
    while True:
        pre = QuantumState(random_state(rng, dim))
        post = QuantumState(random_state(rng, dim))
        if abs(np.vdot(post.amplitudes, pre.amplitudes)) >= min_overlap:
            return pre, post, obs


def near_orthogonal_pair(rng, dim, overlap):
    """States whose overlap has magnitude exactly ``overlap`` (up to rounding)."""
    pre = QuantumState(random_state(rng, dim)).amplitudes
    v = random_state(rng, dim)
    v = v - np.vdot(pre, v) * pre
    v /= np.linalg.norm(v)
    post = overlap * pre + np.sqrt(1 - overlap ** 2) * v
    return QuantumState(pre), QuantumState(post)
