"""Finite-dimensional multi-qudit density matrices.

Subsystems are indexed from 0 and the composite basis is the usual Kronecker
ordering (first subsystem most significant).  Partial trace and partial
transpose reshape to a rank-2n tensor and permute axes, so nothing larger
than the density matrix itself is ever built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadSubsystemIndex,
    DegenerateBloch,
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    StateParseError,
)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
SCHMIDT_RANK_TOL = 1e-9
PARITY_GRID = 256

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


def kron(*factors) -> np.ndarray:
    return reduce(np.kron, factors)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix with an explicit list of local dimensions.

    Use :meth:`unchecked` for matrices that need not be states, such as
    partial transposes.
    """

    entries: np.ndarray
    dims: tuple

    def __post_init__(self):
        self._init(validate=True)

    def _init(self, validate: bool):
        m = np.array(self.entries, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims)) if dims else 0
        if m.shape != (n, n):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match dims {dims}")
        if validate:
            if not np.allclose(m, m.conj().T, atol=HERMITIAN_TOL, rtol=0):
                raise NotHermitian("density matrix is not Hermitian")
            if abs(np.trace(m) - 1) > TRACE_TOL:
                raise NotNormalized(f"trace {np.trace(m).real:.3g} != 1")
            if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -PSD_TOL:
                raise NotNormalized("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def unchecked(cls, entries, dims) -> "DensityMatrix":
        obj = cls.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        object.__setattr__(obj, "dims", dims)
        obj._init(validate=False)
        return obj

    @classmethod
    def from_ket(cls, ket, dims) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise NotNormalized("zero vector")
        v = v / nrm
        return cls(np.outer(v, v.conj()), tuple(dims))

    @classmethod
    def maximally_mixed(cls, dims) -> "DensityMatrix":
        n = int(np.prod(dims))
        return cls(np.eye(n) / n, tuple(dims))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.entries, other.entries), self.dims + other.dims)

    def expectation(self, op) -> complex:
        op = np.asarray(op)
        if op.shape != self.entries.shape:
            raise DimensionMismatch(f"operator shape {op.shape} vs state {self.entries.shape}")
        return complex(np.trace(self.entries @ op))

    def entry(self, row: int, col: int) -> complex:
        """1-based matrix entry rho_{row,col} in the product basis."""
        return complex(self.entries[row - 1, col - 1])

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": list(self.dims),
                "entries": [[[z.real, z.imag] for z in row] for row in self.entries.tolist()],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        data = json.loads(text)
        m = np.array([[complex(re, im) for re, im in row] for row in data["entries"]])
        return cls(m, tuple(data["dims"]))


def mix(weights: Sequence[float], states: Sequence[DensityMatrix]) -> DensityMatrix:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise NotNormalized("mixing weights must be non-negative and sum to 1")
    dims = states[0].dims
    if any(s.dims != dims for s in states):
        raise DimensionMismatch("mixed states must share dims")
    return DensityMatrix(sum(wi * s.entries for wi, s in zip(w, states)), dims)


def _check_indices(indices: Iterable[int], n: int) -> list[int]:
    out = sorted(set(int(i) for i in indices))
    if not out or out[0] < 0 or out[-1] >= n:
        raise BadSubsystemIndex(f"subsystem indices {list(indices)} invalid for {n} parties")
    return out


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    n = rho.n_parties
    keep = _check_indices(keep, n)
    drop = [i for i in range(n) if i not in keep]
    t = rho.entries.reshape(rho.dims * 2)
    # contract row/column index pairs of the traced parties, highest first
    for i in sorted(drop, reverse=True):
        nleft = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + nleft)
    d = int(np.prod([rho.dims[i] for i in keep]))
    return DensityMatrix.unchecked(t.reshape(d, d), tuple(rho.dims[i] for i in keep))


def partial_transpose(rho: DensityMatrix, subsystems: Iterable[int]) -> np.ndarray:
    """Transpose the listed tensor factors; the result may fail to be PSD."""
    n = rho.n_parties
    subs = _check_indices(subsystems, n)
    axes = list(range(2 * n))
    for i in subs:
        axes[i], axes[i + n] = axes[i + n], axes[i]
    t = rho.entries.reshape(rho.dims * 2).transpose(axes)
    d = rho.entries.shape[0]
    return t.reshape(d, d)


def bipartitions(n: int) -> list[tuple[int, ...]]:
    """One representative side of every bipartition of ``n`` parties."""
    out = []
    for mask in range(1, 2 ** (n - 1)):
        out.append(tuple(i for i in range(n) if mask >> i & 1))
    return out


def min_pt_eigenvalue(rho: DensityMatrix, subsystems: Iterable[int] | None = None) -> float:
    """Smallest partial-transpose eigenvalue; over all bipartitions when ``subsystems`` is None."""
    cuts = [tuple(subsystems)] if subsystems is not None else bipartitions(rho.n_parties)
    return min(float(np.linalg.eigvalsh(partial_transpose(rho, c))[0]) for c in cuts)


def eigen_hermitian(m, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("matrix must be square")
    if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return vals[::-1], vecs[:, ::-1]


def psd_power(m, power: float) -> np.ndarray:
    vals, vecs = eigen_hermitian(m)
    vals = np.clip(vals, 0, None)
    return (vecs * vals**power) @ vecs.conj().T


# -- pure bipartite states -------------------------------------------------------


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray  # descending, above the rank tolerance
    basis_a: np.ndarray  # columns |a_j>
    basis_b: np.ndarray  # columns |b_j>

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def entangled(self) -> bool:
        return self.rank > 1

    def reconstruct(self) -> np.ndarray:
        return sum(
            p * np.kron(self.basis_a[:, j], self.basis_b[:, j]) for j, p in enumerate(self.coefficients)
        )


def schmidt(psi, dims: Sequence[int], tol: float = SCHMIDT_RANK_TOL) -> SchmidtDecomposition:
    psi = np.asarray(psi, dtype=complex).ravel()
    da, db = dims
    if psi.size != da * db:
        raise DimensionMismatch(f"vector of length {psi.size} does not fit dims {dims}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise NotNormalized("Schmidt decomposition needs a normalised vector")
    u, s, vh = np.linalg.svd(psi.reshape(da, db))
    r = int(np.sum(s > tol))
    return SchmidtDecomposition(s[:r], u[:, :r], vh[:r, :].T)


def schmidt_rank_from_reduced(psi, dims: Sequence[int], side: int, tol: float = SCHMIDT_RANK_TOL) -> int:
    """Schmidt rank counted from the spectrum of one reduced state (p_j = sqrt(lambda_j)).

    Eigenvalues below the solver noise (~1e-14) are zeroed first; their square
    roots would otherwise clear ``tol``.
    """
    rho = DensityMatrix.from_ket(psi, dims)
    vals, _ = eigen_hermitian(partial_trace(rho, [side]).entries)
    vals = np.where(vals > max(tol**2, 100 * np.finfo(float).eps), vals, 0.0)
    return int(np.sum(np.sqrt(vals) > tol))


# -- single qubits -----------------------------------------------------------------


def bloch_vector(rho) -> np.ndarray:
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape != (2, 2):
        raise DimensionMismatch("Bloch vector needs a single qubit")
    return np.array([np.trace(m @ p).real for p in PAULIS])


def bloch_frame(rho, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal rows (x', y', z') with z' along the Bloch vector.

    x' and y' are the Bloch directions of |v><v_perp| + h.c. and
    i|v_perp><v| - i|v><v_perp| for the eigenvectors |v>, |v_perp> of v.sigma.
    """
    v = bloch_vector(rho)
    nrm = np.linalg.norm(v)
    if nrm < tol:
        raise DegenerateBloch("local state is maximally mixed")
    _, _, sy = bloch_directions(rho, tol)
    z = v / nrm
    y = np.array([np.trace(sy @ p).real / 2 for p in PAULIS])
    return np.array([np.cross(y, z), y, z])


def bloch_directions(rho, tol: float = 1e-9):
    """Return (sigma_z', sigma_x', sigma_y') built from the eigenbasis of v.sigma."""
    v = bloch_vector(rho)
    if np.linalg.norm(v) < tol:
        raise DegenerateBloch("local state is maximally mixed")
    _, vecs = eigen_hermitian(sum(c * p for c, p in zip(v, PAULIS)))
    up, dn = vecs[:, 0], vecs[:, 1]
    sz = np.outer(up, up.conj()) - np.outer(dn, dn.conj())
    sx = np.outer(up, dn.conj()) + np.outer(dn, up.conj())
    sy = 1j * np.outer(dn, up.conj()) - 1j * np.outer(up, dn.conj())
    return sz, sx, sy


def correlation_matrix(rho: DensityMatrix) -> np.ndarray:
    """T_jk = <sigma_j (x) sigma_k> for a two-qubit state."""
    if rho.dims != (2, 2):
        raise DimensionMismatch("correlation matrix needs two qubits")
    return np.array([[rho.expectation(np.kron(a, b)).real for b in PAULIS] for a in PAULIS])


def parity_fringe(rho: DensityMatrix, phis=None) -> tuple[float, np.ndarray]:
    """Parity Pi(phi) = (1 + <X_phi (x) X_phi>)/2 on a grid, and its max - min.

    X_phi = cos(phi) sigma_x + sin(phi) sigma_y is the analysing direction after
    a common phase rotation of both qubits.
    """
    if rho.dims != (2, 2):
        raise DimensionMismatch("parity readout needs two qubits")
    if phis is None:
        phis = np.linspace(0, np.pi, PARITY_GRID, endpoint=False)
    phis = np.asarray(phis, dtype=float)
    vals = np.empty_like(phis)
    for i, phi in enumerate(phis):
        x = math.cos(phi) * SX + math.sin(phi) * SY
        vals[i] = (1 + rho.expectation(np.kron(x, x)).real) / 2
    return float(vals.max() - vals.min()), vals


def parity_contrast_exact(rho: DensityMatrix) -> float:
    return 2 * abs(rho.entries[0, 3])


def expectation_via_hermitian(rho: DensityMatrix, op) -> complex:
    """<O> from the Hermitian pair O + O^dag and i O^dag - i O."""
    op = np.asarray(op, dtype=complex)
    h1 = op + op.conj().T
    h2 = 1j * op.conj().T - 1j * op
    return (rho.expectation(h1).real + 1j * rho.expectation(h2).real) / 2


# -- named states -------------------------------------------------------------------


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def _named_kets():
    s = 1 / math.sqrt(2)
    return {
        "bell:phi+": (s * (ket("00") + ket("11")), (2, 2)),
        "bell:phi-": (s * (ket("00") - ket("11")), (2, 2)),
        "bell:psi+": (s * (ket("01") + ket("10")), (2, 2)),
        "bell:psi-": (s * (ket("01") - ket("10")), (2, 2)),
        "ghz3": (s * (ket("000") + ket("111")), (2, 2, 2)),
        "w3": ((ket("001") + ket("010") + ket("100")) / math.sqrt(3), (2, 2, 2)),
    }


NAMED_STATES = tuple(_named_kets())


def named_ket(name: str) -> tuple[np.ndarray, tuple]:
    kets = _named_kets()
    if name not in kets:
        raise StateParseError(f"unknown state {name!r}; known: {', '.join(kets)}")
    return kets[name]


def named_state(name: str) -> DensityMatrix:
    v, dims = named_ket(name)
    return DensityMatrix.from_ket(v, dims)


def ghz3() -> DensityMatrix:
    return named_state("ghz3")


def w3() -> DensityMatrix:
    return named_state("w3")


def bell(name: str = "phi+") -> DensityMatrix:
    return named_state(f"bell:{name}")


def werner(psi, p: float, dims=(2, 2)) -> DensityMatrix:
    """p |psi><psi| + (1 - p) I/d."""
    pure = DensityMatrix.from_ket(psi, dims)
    d = pure.entries.shape[0]
    return DensityMatrix(p * pure.entries + (1 - p) * np.eye(d) / d, tuple(dims))
