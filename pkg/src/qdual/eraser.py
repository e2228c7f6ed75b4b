"""Delayed-choice quantum eraser on a two-qubit path state.

Photon A is always analysed in the |+>, |-> basis (detector A1 clicks on |+>,
A2 on |->).  Photon B meets an extra beam splitter: with probability
``branch_p`` it goes to the which-way detectors (B1 on |0>, B2 on |1>),
otherwise to the interference detectors (B3 on |+>, B4 on |->).
Visibilities are signed, V = P(A1) - P(A2), so the fringe shift seen behind
B4 shows up as -1 rather than being folded into |V|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duality import duality_check
from .fock import Mixture, TwoModeState
from .qstate import DensityMatrix, partial_trace

A_LABELS = ("A1", "A2")
B_LABELS = ("B1", "B2", "B3", "B4")

_S = 1 / math.sqrt(2)
_PLUS = np.array([_S, _S], dtype=complex)
_MINUS = np.array([_S, -_S], dtype=complex)
_ZERO = np.array([1, 0], dtype=complex)
_ONE = np.array([0, 1], dtype=complex)
A_VECTORS = (_PLUS, _MINUS)
B_VECTORS = (_ZERO, _ONE, _PLUS, _MINUS)


def default_state() -> DensityMatrix:
    return DensityMatrix.from_ket([_S, 0, 0, _S], (2, 2))


@dataclass(frozen=True)
class EraserOutcomeTable:
    joint: np.ndarray  # shape (2, 4): P(A_i, B_j)
    branch_p: float

    @property
    def p_a(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def p_b(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def visibility_a(self) -> float:
        return float(self.p_a[0] - self.p_a[1])

    def conditional(self, j: int) -> np.ndarray:
        """P(A_i | B_j) for j = 1..4; NaN if B_j never clicks."""
        pb = self.p_b[j - 1]
        if pb == 0:
            return np.full(2, np.nan)
        return self.joint[:, j - 1] / pb

    def conditional_visibility(self, j: int) -> float:
        c = self.conditional(j)
        return float(c[0] - c[1])

    def to_dict(self) -> dict:
        return {
            "branch_p": self.branch_p,
            "joint": {
                f"{a},{b}": float(self.joint[i, j])
                for i, a in enumerate(A_LABELS)
                for j, b in enumerate(B_LABELS)
            },
            "V_A": self.visibility_a,
            "V_A_given": {b: self.conditional_visibility(j + 1) for j, b in enumerate(B_LABELS)},
        }


def _as_dm(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    return DensityMatrix.from_ket(state, (2, 2))


def eraser_probabilities(state=None, branch_p: float = 0.5) -> EraserOutcomeTable:
    if not 0 <= branch_p <= 1:
        raise ValueError("branch_p must lie in [0, 1]")
    rho = default_state() if state is None else _as_dm(state)
    weights = (branch_p, branch_p, 1 - branch_p, 1 - branch_p)
    joint = np.empty((2, 4))
    for i, a in enumerate(A_VECTORS):
        for j, (b, w) in enumerate(zip(B_VECTORS, weights)):
            v = np.kron(a, b)
            joint[i, j] = w * float(np.real(v.conj() @ rho.entries @ v))
    return EraserOutcomeTable(joint, branch_p)


def conditional_a_state(state=None, j: int = 3) -> tuple[float, DensityMatrix | None]:
    """Probability that the B_j port fires (within its branch) and the resulting A state."""
    rho = default_state() if state is None else _as_dm(state)
    b = B_VECTORS[j - 1]
    proj = np.kron(np.eye(2), np.outer(b, b.conj()))
    post = proj @ rho.entries @ proj
    p = float(np.trace(post).real)
    if p <= 1e-15:
        return 0.0, None
    post = DensityMatrix(post / p, (2, 2))
    return p, partial_trace(post, [0])


def path_qubit_to_fock(rho_a: DensityMatrix) -> Mixture:
    """Map a path qubit to one photon in two modes: |0> -> |1,0>, |1> -> |0,1>."""
    vals, vecs = np.linalg.eigh(rho_a.entries)
    keep = vals > 1e-14
    states = []
    for v in vecs[:, keep].T:
        amps = np.zeros((2, 2), dtype=complex)
        amps[1, 0], amps[0, 1] = v[0], v[1]
        states.append(TwoModeState(amps))
    w = vals[keep] / vals[keep].sum()
    return Mixture(tuple(w), tuple(states))


def conditional_duality(state=None) -> dict:
    """D, V of A's photon after conditioning on each B detector."""
    out = {}
    for j, label in enumerate(B_LABELS, start=1):
        p, rho_a = conditional_a_state(state, j)
        if rho_a is None:
            out[label] = None
            continue
        r = duality_check(path_qubit_to_fock(rho_a), 1)
        out[label] = {"p": p, "D": r.D, "V": r.V, "slack": r.duality_slack}
    return out


def sample_clicks(table: EraserOutcomeTable, n: int, seed: int | None = None) -> np.ndarray:
    """Multinomial coincidence counts with the table's joint distribution, shape (2, 4)."""
    if n < 1:
        raise ValueError("need at least one shot")
    rng = np.random.default_rng(seed)
    p = table.joint.ravel()
    return rng.multinomial(n, p / p.sum()).reshape(2, 4)


def empirical_visibilities(counts: np.ndarray) -> dict:
    counts = np.asarray(counts, dtype=float)
    out = {"V_A": float((counts[0].sum() - counts[1].sum()) / counts.sum())}
    for j, b in enumerate(B_LABELS):
        col = counts[:, j]
        out[f"V_A|{b}"] = float((col[0] - col[1]) / col.sum()) if col.sum() else float("nan")
    return out
