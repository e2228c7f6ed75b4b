"""Entanglement criteria that return :class:`CriterionVerdict` objects.

Conventions: parties are 0-based, matrix entries quoted as ``rho_{j,k}`` are
1-based in the product basis |000>, |001>, ..., |111>.  Every criterion is
one-sided: a violation certifies the stated kind of entanglement, the
absence of a violation proves nothing.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import product as iproduct
from typing import Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import BadProbability, DegenerateBloch, DimensionMismatch, NegativeAlpha, NotDichotomic
from .qstate import (
    SX,
    SZ,
    DensityMatrix,
    bipartitions,
    bloch_frame,
    correlation_matrix,
    kron,
    min_pt_eigenvalue,
    partial_trace,
    psd_power,
    werner,
)
from .verdict import VIOLATION_TOL, CriterionVerdict

# -- CHSH and the classical correlation polytope ------------------------------------


def _check_dichotomic(op, name: str) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise DimensionMismatch(f"{name} must be a qubit observable")
    if not np.allclose(op, op.conj().T, atol=1e-10) or not np.allclose(op @ op, np.eye(2), atol=1e-10):
        raise NotDichotomic(f"{name} must be Hermitian with eigenvalues +1 and -1")
    return op


def chsh(rho: DensityMatrix, a1, a2, b1, b2, tol: float = VIOLATION_TOL) -> CriterionVerdict:
    """|<A1B1 + A2B2 + A2B1 - A1B2>| <= 2 for local hidden variable models."""
    if rho.dims != (2, 2):
        raise DimensionMismatch("CHSH evaluator needs a two-qubit state")
    a = [_check_dichotomic(a1, "A1"), _check_dichotomic(a2, "A2")]
    b = [_check_dichotomic(b1, "B1"), _check_dichotomic(b2, "B2")]
    e = {(i + 1, j + 1): rho.expectation(np.kron(a[i], b[j])).real for i in range(2) for j in range(2)}
    value = e[1, 1] + e[2, 2] + e[2, 1] - e[1, 2]
    details = {f"E{i}{j}": v for (i, j), v in e.items()}
    return CriterionVerdict.from_sides("chsh", abs(value), 2.0, "entangled", tol, details)


def bell_settings():
    """Singlet-optimal settings: A1=sx, A2=sz, B1=(sx+sz)/sqrt2, B2=(sz-sx)/sqrt2."""
    s = 1 / math.sqrt(2)
    return SX, SZ, s * (SX + SZ), s * (SZ - SX)


def deterministic_strategies() -> np.ndarray:
    """Correlation vectors (E11, E12, E21, E22) of the 16 local deterministic assignments."""
    rows = []
    for a1, a2, b1, b2 in iproduct((1, -1), repeat=4):
        rows.append((a1 * b1, a1 * b2, a2 * b1, a2 * b2))
    return np.array(rows, dtype=float)


_CORR_INDEX = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}


def classical_correlation_bound(fixed: dict, target=(1, 2)) -> tuple[float, float]:
    """Range of <A_i B_j> over mixtures of deterministic local strategies.

    ``fixed`` maps (i, j) pairs to prescribed correlations.  Solved exactly as
    two linear programs over the 16 strategy weights.
    """
    strat = deterministic_strategies()
    a_eq = [np.ones(16)]
    b_eq = [1.0]
    for key, value in fixed.items():
        a_eq.append(strat[:, _CORR_INDEX[tuple(key)]])
        b_eq.append(float(value))
    c = strat[:, _CORR_INDEX[tuple(target)]]
    out = []
    for sign in (1, -1):
        res = linprog(sign * c, A_eq=np.array(a_eq), b_eq=b_eq, bounds=[(0, None)] * 16, method="highs")
        if res.status != 0:
            raise ValueError("prescribed correlations are not classically attainable")
        out.append(sign * res.fun)
    return float(out[0]), float(out[1])


def classical_sock_bound(p1: float, p2: float) -> tuple[float, float]:
    """Classical range of <A1 B2> when <A1B1> = <A2B2> = <A2B1> = p2 - p1.

    ``p1`` weights the assignment with perfectly anticorrelated outcomes on
    the three fixed pairs and ``p2`` the one with perfect correlation.
    """
    if p1 < 0 or p2 < 0 or abs(p1 + p2 - 1) > 1e-12:
        raise BadProbability(f"p1={p1}, p2={p2} must be non-negative and sum to 1")
    c = p2 - p1
    return classical_correlation_bound({(1, 1): c, (2, 2): c, (2, 1): c})


def sock_probabilities_for(correlation: float) -> tuple[float, float]:
    p1 = (1 - correlation) / 2
    return p1, 1 - p1


# -- two-qubit witnesses ---------------------------------------------------------------


def _perp_basis(z: np.ndarray) -> np.ndarray:
    helper = np.eye(3)[np.argmin(abs(z))]
    x = np.cross(helper, z)
    x /= np.linalg.norm(x)
    return np.array([x, np.cross(z, x)])


def pauli_sum_witness(rho: DensityMatrix, directions=None, tol: float = VIOLATION_TOL) -> CriterionVerdict:
    """Sum of two correlations along orthonormal local direction pairs; <= 1 if separable.

    With ``directions=None`` the first pair is (z'_A, z'_B) along the local
    Bloch vectors and the second pair is the best choice inside the planes
    perpendicular to them.  If either Bloch vector vanishes the maximum over
    all orthonormal pairs is used instead (sum of the two largest singular
    values of the correlation matrix).  ``directions`` may give explicit
    [(u1, w1), (u2, w2), ...] with mutually orthogonal unit u's and w's.
    """
    t = correlation_matrix(rho)
    if directions is not None:
        us = np.array([np.asarray(u, float) for u, _ in directions])
        ws = np.array([np.asarray(w, float) for _, w in directions])
        for m in (us, ws):
            if not np.allclose(m @ m.T, np.eye(len(m)), atol=1e-9):
                raise ValueError("local directions must be orthonormal")
        lhs = float(sum(u @ t @ w for u, w in zip(us, ws)))
        return CriterionVerdict.from_sides("pauli_sum", lhs, 1.0, "entangled", tol, {"mode": "explicit"})
    try:
        za = bloch_frame(partial_trace(rho, [0]))[2]
        zb = bloch_frame(partial_trace(rho, [1]))[2]
    except DegenerateBloch:
        s = np.linalg.svd(t, compute_uv=False)
        return CriterionVerdict.from_sides(
            "pauli_sum", s[0] + s[1], 1.0, "entangled", tol, {"mode": "direction-scan"}
        )
    pa, pb = _perp_basis(za), _perp_basis(zb)
    perp = np.linalg.svd(pa @ t @ pb.T, compute_uv=False)[0]
    lhs = za @ t @ zb + perp
    return CriterionVerdict.from_sides(
        "pauli_sum", lhs, 1.0, "entangled", tol, {"mode": "bloch", "zz": float(za @ t @ zb), "perp": perp}
    )


def cauchy_schwarz_criterion(rho: DensityMatrix, a1, a2, b1, b2, tol: float = VIOLATION_TOL):
    """|<A1A2 B1B2>|^2 <= <A1A1^dag B2^dag B2><A2^dag A2 B1 B1^dag> for separable states."""
    if rho.n_parties != 2:
        raise DimensionMismatch("bipartite state required")
    da, db = rho.dims
    a1, a2, b1, b2 = (np.asarray(x, dtype=complex) for x in (a1, a2, b1, b2))
    if a1.shape != (da, da) or a2.shape != (da, da) or b1.shape != (db, db) or b2.shape != (db, db):
        raise DimensionMismatch("operators do not match local dimensions")
    h = lambda m: m.conj().T
    lhs = abs(rho.expectation(np.kron(a1 @ a2, b1 @ b2))) ** 2
    rhs = rho.expectation(np.kron(a1 @ h(a1), h(b2) @ b2)).real * rho.expectation(
        np.kron(h(a2) @ a2, b1 @ h(b1))
    ).real
    return CriterionVerdict.from_sides("cauchy_schwarz", lhs, rhs, "entangled", tol)


def rank_one_pair(u, v, d: int):
    """Operators X1 = |u><phi|, X2 = |phi><v| with a fixed auxiliary |phi> (= |0>)."""
    phi = np.zeros(d, dtype=complex)
    phi[0] = 1
    return np.outer(u, phi.conj()), np.outer(phi, np.conj(v))


def _unpack(p: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    out, i = [], 0
    for d in sizes:
        z = p[i : i + d] + 1j * p[i + d : i + 2 * d]
        out.append(z / np.linalg.norm(z))
        i += 2 * d
    return out


def _cs_rank_one(t, a, al, b, be):
    """lhs and rhs of the rank-one Cauchy-Schwarz test on rho as a (dA,dB,dA,dB) tensor."""
    e = lambda x, y, u, v: np.einsum("i,j,ijkl,k,l->", x.conj(), y.conj(), t, u, v)
    lhs = abs(e(al, be, a, b)) ** 2
    rhs = max(e(a, be, a, be).real, 0) * max(e(al, b, al, b).real, 0)
    return lhs, rhs


@dataclass(frozen=True)
class OptimizedVerdict:
    verdict: CriterionVerdict
    vectors: dict = field(default_factory=dict)


def optimize_cauchy_schwarz(rho: DensityMatrix, restarts: int = 64, seed: int = 0, tol: float = VIOLATION_TOL):
    """Maximise the Cauchy-Schwarz margin over rank-one local operators.

    With A1 = |a><phi|, A2 = |phi><alpha| and likewise for B the test reads
    |<alpha beta|rho|a b>|^2 <= <a beta|rho|a beta><alpha b|rho|alpha b>.
    Starts include all product-basis choices plus random ones.
    """
    da, db = rho.dims
    t = rho.entries.reshape(da, db, da, db)
    sizes = (da, da, db, db)
    f = lambda p: -np.subtract(*_cs_rank_one(t, *_unpack(p, sizes)))
    rng = np.random.default_rng(seed)
    starts = []
    for i, j, k, l in iproduct(range(da), range(da), range(db), range(db)):
        p = []
        for d, idx in zip(sizes, (i, j, k, l)):
            z = np.zeros(2 * d)
            z[idx] = 1
            p.append(z)
        starts.append(np.concatenate(p) + 1e-3 * rng.normal(size=2 * sum(sizes)))
    starts += [rng.normal(size=2 * sum(sizes)) for _ in range(restarts)]
    best = None
    for p0 in starts:
        res = minimize(f, p0, method="L-BFGS-B")
        if best is None or res.fun < best.fun:
            best = res
    a, al, b, be = _unpack(best.x, sizes)
    a1, a2 = rank_one_pair(a, al, da)
    b1, b2 = rank_one_pair(b, be, db)
    verdict = cauchy_schwarz_criterion(rho, a1, a2, b1, b2, tol)
    return OptimizedVerdict(verdict, {"a": a, "alpha": al, "b": b, "beta": be})


def werner_detection_scan(psi, p_grid, restarts: int = 8, seed: int = 0, dims=(2, 2)) -> dict:
    """Smallest grid p at which the optimised Cauchy-Schwarz test and PPT each detect
    p|psi><psi| + (1-p) I/d."""
    cs_threshold = ppt_threshold = None
    for p in sorted(float(x) for x in p_grid):
        rho = werner(psi, p, dims)
        if ppt_threshold is None and min_pt_eigenvalue(rho, [0]) < -VIOLATION_TOL:
            ppt_threshold = p
        if cs_threshold is None and optimize_cauchy_schwarz(rho, restarts, seed).verdict.violated:
            cs_threshold = p
        if cs_threshold is not None and ppt_threshold is not None:
            break
    return {"cauchy_schwarz": cs_threshold, "ppt": ppt_threshold}


# -- three qubits: matrix-entry inequalities ---------------------------------------------


def _three_qubits(rho: DensityMatrix) -> np.ndarray:
    if rho.dims != (2, 2, 2):
        raise DimensionMismatch("three-qubit state required")
    return rho.entries


def tripartite_biseparable_test(rho: DensityMatrix, tol: float = VIOLATION_TOL):
    """Two inequalities obeyed by every convex biseparable three-qubit state."""
    m = _three_qubits(rho)
    r = lambda j, k: m[j - 1, k - 1]
    d = lambda j: max(r(j, j).real, 0.0)
    rhs1 = math.sqrt(d(2) * d(7)) + math.sqrt(d(3) * d(6)) + math.sqrt(d(4) * d(5))
    lhs2 = abs(r(2, 3)) + abs(r(2, 5)) + abs(r(3, 5))
    rhs2 = (
        math.sqrt(d(1) * d(4))
        + math.sqrt(d(1) * d(6))
        + math.sqrt(d(1) * d(7))
        + (d(2) + d(3) + d(5)) / 2
    )
    return (
        CriterionVerdict.from_sides("bs_ghz", abs(r(1, 8)), rhs1, "GME-witnessed", tol),
        CriterionVerdict.from_sides("bs_w", lhs2, rhs2, "GME-witnessed", tol),
    )


def tripartite_full_separability_test(rho: DensityMatrix, tol: float = VIOLATION_TOL):
    """|rho_18| against two sixth-root products of diagonal entries.

    The second bound uses rho_44 squared so that both sides are of degree one.
    """
    m = _three_qubits(rho)
    d = np.clip(np.diag(m).real, 0, None)
    lhs = abs(m[0, 7])
    rhs1 = float(np.prod(d[1:7])) ** (1 / 6)
    rhs2 = float(d[0] * d[3] ** 2 * d[4] * d[5] * d[6]) ** (1 / 6)
    return (
        CriterionVerdict.from_sides("sep_1", lhs, rhs1, "not-fully-separable", tol),
        CriterionVerdict.from_sides("sep_2", lhs, rhs2, "not-fully-separable", tol),
    )


# -- Hoelder four-root criterion ------------------------------------------------------------


def hoelder_four_root_criterion(rho: DensityMatrix, a1, a2, b1, b2, c1, c2, tol: float = VIOLATION_TOL):
    """|<A1A2 B1B2 C1C2>| <= fourth root of
    <A1A1' B1B1' C2'C2><A1A1' B2'B2 C1C1'><A2'A2 B1B1' C1C1'><A2'A2 B2'B2 C2'C2>
    (' = dagger) for fully separable states."""
    if rho.n_parties != 3:
        raise DimensionMismatch("tripartite state required")
    ops = [np.asarray(x, dtype=complex) for x in (a1, a2, b1, b2, c1, c2)]
    for op, d in zip(ops, np.repeat(rho.dims, 2)):
        if op.shape != (d, d):
            raise DimensionMismatch("operators do not match local dimensions")
    a1, a2, b1, b2, c1, c2 = ops
    h = lambda m: m.conj().T
    ex = lambda *f: rho.expectation(kron(*f)).real
    lhs = abs(rho.expectation(kron(a1 @ a2, b1 @ b2, c1 @ c2)))
    terms = [
        ex(a1 @ h(a1), b1 @ h(b1), h(c2) @ c2),
        ex(a1 @ h(a1), h(b2) @ b2, c1 @ h(c1)),
        ex(h(a2) @ a2, b1 @ h(b1), c1 @ h(c1)),
        ex(h(a2) @ a2, h(b2) @ b2, h(c2) @ c2),
    ]
    rhs = float(np.prod(np.clip(terms, 0, None))) ** 0.25
    return CriterionVerdict.from_sides("hoelder4", lhs, rhs, "not-fully-separable", tol, {"terms": terms})


def _hoelder_rank_one(t, a, ap, b, bp, c, cp):
    """Rank-one reduction: lhs = |<a'b'c'|rho|abc>|,
    rhs = (<abc'><ab'c><a'bc><a'b'c'>)^(1/4) with <xyz> = <xyz|rho|xyz>."""
    e = lambda x, y, z, u, v, w: np.einsum(
        "i,j,k,ijklmn,l,m,n->", x.conj(), y.conj(), z.conj(), t, u, v, w
    )
    lhs = abs(e(ap, bp, cp, a, b, c))
    diag = [
        e(a, b, cp, a, b, cp).real,
        e(a, bp, c, a, bp, c).real,
        e(ap, b, c, ap, b, c).real,
        e(ap, bp, cp, ap, bp, cp).real,
    ]
    return lhs, float(np.prod(np.clip(diag, 0, None))) ** 0.25


HOELDER_VECTOR_NAMES = ("a", "a'", "b", "b'", "c", "c'")


def hoelder_operators(vectors: dict, dims=(2, 2, 2)):
    """Rank-one operators (A1, A2, B1, B2, C1, C2) from the six vectors."""
    out = []
    for (u, v), d in zip((("a", "a'"), ("b", "b'"), ("c", "c'")), dims):
        out.extend(rank_one_pair(np.asarray(vectors[u]), np.asarray(vectors[v]), d))
    return tuple(out)


def load_hoelder_config() -> dict:
    """Operator vectors found by the search for the PPT family, shipped with the package."""
    text = resources.files("qdual").joinpath("data/hoelder_operators.json").read_text()
    raw = json.loads(text)
    return {k: np.array([complex(re, im) for re, im in v]) for k, v in raw["vectors"].items()}


def optimize_hoelder(
    rho: DensityMatrix,
    restarts: int = 64,
    seed: int = 0,
    initial: dict | None = None,
    tol: float = VIOLATION_TOL,
) -> OptimizedVerdict:
    """Maximise the four-root margin over rank-one operators by L-BFGS-B restarts."""
    dims = rho.dims
    if len(dims) != 3:
        raise DimensionMismatch("tripartite state required")
    t = rho.entries.reshape(dims * 2)
    sizes = tuple(np.repeat(dims, 2))
    f = lambda p: -np.subtract(*_hoelder_rank_one(t, *_unpack(p, sizes)))
    rng = np.random.default_rng(seed)
    starts = [rng.normal(size=2 * sum(sizes)) for _ in range(restarts)]
    if initial is not None:
        parts = []
        for name in HOELDER_VECTOR_NAMES:
            z = np.asarray(initial[name], dtype=complex)
            parts.append(np.concatenate([z.real, z.imag]))
        starts.insert(0, np.concatenate(parts))
    best = None
    for p0 in starts:
        res = minimize(f, p0, method="L-BFGS-B")
        if best is None or res.fun < best.fun:
            best = res
    vecs = dict(zip(HOELDER_VECTOR_NAMES, _unpack(best.x, sizes)))
    verdict = hoelder_four_root_criterion(rho, *hoelder_operators(vecs, dims), tol=tol)
    return OptimizedVerdict(verdict, vecs)


# -- PPT entangled family -----------------------------------------------------------------


def rho_alpha(alpha: float, check: bool = False) -> DensityMatrix:
    """Three-qubit family with prefactor 1/(8+8 alpha).

    The matrix is only positive semidefinite for alpha >= 2, so by default it
    is returned through the unchecked constructor; ``check=True`` validates.
    """
    if alpha < 0:
        raise NegativeAlpha(f"alpha={alpha} must be non-negative")
    m = np.diag([4 + alpha] + [alpha] * 6 + [4 + alpha]).astype(complex)
    for j, k, v in ((0, 7, 2), (1, 6, 2), (2, 5, -2), (3, 4, 2)):
        m[j, k] = m[k, j] = v
    m /= 8 + 8 * alpha
    if check:
        return DensityMatrix(m, (2, 2, 2))
    return DensityMatrix.unchecked(m, (2, 2, 2))


def rho_alpha_min_pt(alpha: float) -> float:
    return min_pt_eigenvalue(rho_alpha(alpha))


# -- product bounds of the Hillery-Zubairy type -------------------------------------------


def _local_expectation(rho: DensityMatrix, party: int, op) -> complex:
    return partial_trace(rho, [party]).expectation(op)


def hillery_product_bound(rho: DensityMatrix, ops: Sequence, tol: float = VIOLATION_TOL):
    """|<prod O_k>| <= prod <(O_k^dag O_k)^(n/2)>^(1/n) for fully separable states.

    Fractional powers of the positive operator O^dag O are taken through its
    spectral decomposition, so odd n needs no extra restriction.
    """
    n = len(ops)
    if n != rho.n_parties:
        raise DimensionMismatch("one operator per party required")
    lhs = abs(rho.expectation(kron(*ops)))
    rhs = 1.0
    for k, op in enumerate(ops):
        op = np.asarray(op, dtype=complex)
        val = _local_expectation(rho, k, psd_power(op.conj().T @ op, n / 2)).real
        rhs *= max(val, 0.0) ** (1 / n)
    return CriterionVerdict.from_sides("hillery_product", lhs, rhs, "not-fully-separable", tol)


def split_bound(rho: DensityMatrix, ops: Sequence, j: int, tol: float = VIOLATION_TOL):
    """|<prod O_k>|^2 <= <prod_{k<j} O_k^dag O_k prod_{k>=j} O_k O_k^dag>.

    Holds whenever the state is separable across parties [0, j) | [j, n).
    """
    n = len(ops)
    if n != rho.n_parties or not 0 < j < n:
        raise DimensionMismatch("one operator per party and 0 < j < n required")
    ops = [np.asarray(o, dtype=complex) for o in ops]
    lhs = abs(rho.expectation(kron(*ops))) ** 2
    rhs = rho.expectation(
        kron(*[o.conj().T @ o if k < j else o @ o.conj().T for k, o in enumerate(ops)])
    ).real
    return CriterionVerdict.from_sides(f"split_{j}", lhs, rhs, "entangled", tol)


def shifts_upb_state() -> DensityMatrix:
    """Bound entangled three-qubit state built from the Shifts unextendible product basis.

    It is separable across every single cut, yet not fully separable.
    """
    z, o = np.array([1, 0], complex), np.array([0, 1], complex)
    p, m = (z + o) / math.sqrt(2), (z - o) / math.sqrt(2)
    proj = np.eye(8, dtype=complex)
    for v in (kron(z, o, p), kron(o, p, z), kron(p, z, o), kron(m, m, m)):
        proj -= np.outer(v, v.conj())
    return DensityMatrix(proj / 4, (2, 2, 2))


# -- classification --------------------------------------------------------------------------


@dataclass(frozen=True)
class TripartiteClass:
    label: str
    evidence: tuple
    npt_cuts: tuple  # bipartitions (as the party set on one side) with a negative PT eigenvalue

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "npt_cuts": [list(c) for c in self.npt_cuts],
            "ppt_all_cuts": not self.npt_cuts,
            "evidence": [v.to_dict() for v in self.evidence],
        }


def classify_tripartite(
    rho: DensityMatrix, hoelder_restarts: int = 0, seed: int = 0, tol: float = VIOLATION_TOL
) -> TripartiteClass:
    """Strongest label that the implemented criteria can prove.

    Order of strength: GME, not-fully-separable, unknown.  Separability is never
    claimed.  ``hoelder_restarts > 0`` adds an optimised four-root test.
    """
    _three_qubits(rho)
    evidence = list(tripartite_biseparable_test(rho, tol))
    evidence += list(tripartite_full_separability_test(rho, tol))
    npt = tuple(c for c in bipartitions(3) if min_pt_eigenvalue(rho, c) < -tol)
    for cut in bipartitions(3):
        ev = min_pt_eigenvalue(rho, cut)
        evidence.append(CriterionVerdict.from_sides(f"ppt_{''.join(map(str, cut))}", -ev, 0.0, "NPT", tol))
    if hoelder_restarts > 0:
        evidence.append(optimize_hoelder(rho, hoelder_restarts, seed, tol=tol).verdict)
    if any(v.violated and v.hint == "GME-witnessed" for v in evidence):
        label = "GME"
    elif any(v.violated for v in evidence):
        label = "not-fully-separable"
    else:
        label = "unknown"
    return TripartiteClass(label, tuple(evidence), npt)


CRITERIA = ("chsh", "pauli_sum", "cauchy_schwarz", "bs", "sep", "hoelder4", "ppt", "classify")
