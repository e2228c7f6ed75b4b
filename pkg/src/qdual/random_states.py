"""Seeded random state generators for soundness sweeps.

Every function takes a ``numpy.random.Generator`` so that sweeps are
reproducible from a single seed.
"""
from __future__ import annotations

import numpy as np

from .fock import TwoModeState
from .qstate import PAULIS, DensityMatrix, kron

MAX_COMPONENTS = 8


def haar_ket(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def pure_dm(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def random_mixed_dm(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre matrix of the given rank."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def _weights(rng, m: int) -> np.ndarray:
    return rng.dirichlet(np.ones(m))


def _n_components(rng, components: int | None) -> int:
    return int(rng.integers(1, MAX_COMPONENTS + 1)) if components is None else components


def random_product_state(rng: np.random.Generator, dims) -> DensityMatrix:
    return DensityMatrix(kron(*[pure_dm(haar_ket(rng, d)) for d in dims]), tuple(dims))


def random_separable(rng: np.random.Generator, dims, components: int | None = None) -> DensityMatrix:
    """Dirichlet-weighted mixture of at most eight random pure product states."""
    m = _n_components(rng, components)
    w = _weights(rng, m)
    mat = sum(wi * random_product_state(rng, dims).entries for wi in w)
    return DensityMatrix(mat, tuple(dims))


def random_biseparable_fixed(rng, dims, group, components: int | None = None) -> DensityMatrix:
    """Mixture of states that factorise as (parties in ``group``) | (the rest).

    The composite ordering of ``dims`` is restored by permuting tensor axes.
    """
    n = len(dims)
    group = sorted(group)
    rest = [i for i in range(n) if i not in group]
    order = group + rest
    da = int(np.prod([dims[i] for i in group]))
    db = int(np.prod([dims[i] for i in rest]))
    m = _n_components(rng, components)
    w = _weights(rng, m)
    mat = 0
    for wi in w:
        v = np.kron(haar_ket(rng, da), haar_ket(rng, db))
        t = v.reshape([dims[i] for i in order]).transpose(np.argsort(order)).ravel()
        mat = mat + wi * pure_dm(t)
    return DensityMatrix(mat, tuple(dims))


def random_convex_biseparable(rng, n_qubits: int = 3, components: int | None = None) -> DensityMatrix:
    """Mixture over the three single-party cuts of a three-qubit system."""
    dims = (2,) * n_qubits
    m = _n_components(rng, components)
    w = _weights(rng, m)
    mat = sum(
        wi * random_biseparable_fixed(rng, dims, [int(rng.integers(n_qubits))], components=1).entries
        for wi in w
    )
    return DensityMatrix(mat, dims)


def random_two_mode_ket(rng: np.random.Generator, cutoff: int) -> TwoModeState:
    amps = haar_ket(rng, (cutoff + 1) ** 2).reshape(cutoff + 1, cutoff + 1)
    return TwoModeState(amps)


def random_two_mode_product(rng: np.random.Generator, cutoff: int) -> TwoModeState:
    return TwoModeState.product(haar_ket(rng, cutoff + 1), haar_ket(rng, cutoff + 1))


def random_dichotomic(rng: np.random.Generator) -> np.ndarray:
    """n.sigma for a random unit vector n."""
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    return sum(c * p for c, p in zip(n, PAULIS))


def random_operator(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
