"""Collective spin observables on qubit chains.

Spin convention: Pauli operators with eigenvalues +1/-1, J = sum_j sigma_j,
so J_max = N.  A spin-1/2 normalisation (J = sum sigma/2, J_max = N/2) gives
half of every ``(Delta J)^2 / J_max`` reported here; the ratio x is the same
in both conventions.

States are dense vectors of length 2**N (or density matrices); site operators
are applied with ``tensordot`` so no 2**N x 2**N operator is ever formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx
import numpy as np
from scipy.optimize import minimize

from .errors import DimensionMismatch, IndivisibleN, OddN
from .qstate import PAULIS, DensityMatrix

EPS0 = 2 - math.sqrt(3)
AXES = {"x": 0, "y": 1, "z": 2}


# -- dense N-qubit helpers ------------------------------------------------------------


def _n_qubits(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return n


def apply_site(psi: np.ndarray, op: np.ndarray, site: int, n: int) -> np.ndarray:
    t = np.tensordot(op, psi.reshape((2,) * n), axes=([1], [site]))
    return np.moveaxis(t, 0, site).reshape(-1)


def apply_weighted_sum(psi: np.ndarray, op: np.ndarray, weights) -> np.ndarray:
    """(sum_j w_j op_j) psi."""
    n = len(weights)
    out = np.zeros_like(psi, dtype=complex)
    for j, w in enumerate(weights):
        if w != 0:
            out += w * apply_site(psi, op, j, n)
    return out


def _ensemble(state):
    """(weights, kets) for a ket or a density matrix over qubits."""
    if isinstance(state, DensityMatrix):
        if any(d != 2 for d in state.dims):
            raise DimensionMismatch("qubit state required")
        vals, vecs = np.linalg.eigh(state.entries)
        keep = vals > 1e-14
        return vals[keep], vecs[:, keep].T
    psi = np.asarray(state, dtype=complex).ravel()
    _n_qubits(psi.size)
    return np.array([1.0]), psi[None, :] / np.linalg.norm(psi)


def weighted_moments(state, weights, axis: int) -> tuple[float, float]:
    """<B> and <B^2> for B = sum_j weights_j sigma_axis_j."""
    ws, kets = _ensemble(state)
    if 2 ** len(weights) != kets.shape[1]:
        raise DimensionMismatch("number of couplings does not match the state")
    m1 = m2 = 0.0
    for w, psi in zip(ws, kets):
        b = apply_weighted_sum(psi, PAULIS[axis], weights)
        m1 += w * np.vdot(psi, b).real
        m2 += w * np.vdot(b, b).real
    return m1, m2


def collective_variance_J(state, axis: str = "z") -> float:
    ws, kets = _ensemble(state)
    n = _n_qubits(kets.shape[1])
    m1, m2 = weighted_moments(state, np.ones(n), AXES[axis])
    return m2 - m1**2


def transverse_length(state) -> float:
    """x = sqrt(<J_x^2 + J_y^2>) / J_max."""
    ws, kets = _ensemble(state)
    n = _n_qubits(kets.shape[1])
    total = sum(weighted_moments(state, np.ones(n), a)[1] for a in (0, 1))
    return math.sqrt(total) / n


# -- gradient field observable ----------------------------------------------------------


@dataclass(frozen=True)
class SpinEnsemble:
    positions: np.ndarray
    wavelength: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("need at least one position")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.size

    @property
    def couplings(self) -> np.ndarray:
        return np.sin(2 * np.pi * self.positions / self.wavelength)

    @classmethod
    def chain(cls, n: int, wavelength: float = 1.0, spacing: float | None = None) -> "SpinEnsemble":
        """Equally spaced chain centred on a node: x_j = (j + 1/2) d for j = -n/2 .. n/2 - 1.

        The default spacing d = wavelength / (2n) puts the whole chain inside one
        half period, the geometry of the nearest-neighbour width bound.
        """
        d = wavelength / (2 * n) if spacing is None else spacing
        j = np.arange(n) - n // 2
        return cls((j + 0.5) * d, wavelength)


def gradient_variance_B(state, ensemble: SpinEnsemble) -> float:
    """(Delta B)^2 summed over x, y, z for B = sum_j a_j sigma_j."""
    a = ensemble.couplings
    total = 0.0
    for axis in range(3):
        m1, m2 = weighted_moments(state, a, axis)
        total += m2 - m1**2
    return total


def min_pair_variance(a_j: float, a_k: float) -> float:
    """Smallest (Delta B)^2 over two-qubit states for couplings a_j, a_k.

    With |a_j| >= |a_k| and eps = a_k / a_j:
    a_j^2 (2 + 2 eps^2 - 4 eps^2 / (1 - eps)^2) for eps <= 2 - sqrt3, else
    3 a_j^2 (1 - eps)^2 (the singlet).  Both couplings zero gives 0.
    """
    if abs(a_j) < abs(a_k):
        a_j, a_k = a_k, a_j
    if a_j == 0:
        return 0.0
    eps = a_k / a_j
    if eps <= EPS0:
        return a_j**2 * (2 + 2 * eps**2 - 4 * eps**2 / (1 - eps) ** 2)
    return 3 * a_j**2 * (1 - eps) ** 2


def min_site_variance(a: float) -> float:
    """Single site: spin along z leaves only the two transverse unit variances."""
    return 2 * a * a


def pair_variance_numeric(a_j: float, a_k: float, restarts: int = 20, seed: int = 0) -> float:
    """Direct minimisation over all two-qubit pure states (oracle for the closed form)."""
    sig = [np.kron(p, np.eye(2)) for p in PAULIS], [np.kron(np.eye(2), p) for p in PAULIS]
    bs = [a_j * s1 + a_k * s2 for s1, s2 in zip(*sig)]
    b2 = sum(b @ b for b in bs)

    def var(p):
        v = p[:4] + 1j * p[4:]
        v = v / np.linalg.norm(v)
        return np.vdot(v, b2 @ v).real - sum(np.vdot(v, b @ v).real ** 2 for b in bs)

    rng = np.random.default_rng(seed)
    return min(minimize(var, rng.normal(size=8), method="BFGS", options={"gtol": 1e-12}).fun for _ in range(restarts))


# -- width and pairings -------------------------------------------------------------------


def group_width(group) -> int:
    """Chain steps spanned by a group, counted inclusively (sites 1..6 give 6)."""
    g = list(group)
    return max(g) - min(g) + 1


def partition_width(groups) -> int:
    """Width of a product of entangled groups; singletons contribute 1."""
    return max(group_width(g) for g in groups)


def partition_depth(groups) -> int:
    return max(len(g) for g in groups)


@dataclass(frozen=True)
class PairingStructure:
    n: int
    pairs: tuple = field(default_factory=tuple)  # 0-based (j, k) with j < k

    def __post_init__(self):
        seen = [i for p in self.pairs for i in p]
        if len(seen) != len(set(seen)) or any(not 0 <= i < self.n for i in seen):
            raise ValueError("each particle may appear in at most one pair")
        object.__setattr__(self, "pairs", tuple(sorted(tuple(sorted(p)) for p in self.pairs)))

    @property
    def singletons(self) -> tuple:
        used = {i for p in self.pairs for i in p}
        return tuple(i for i in range(self.n) if i not in used)

    @property
    def width(self) -> int:
        return max([group_width(p) for p in self.pairs], default=1)

    def bound(self, couplings) -> float:
        """Sum of per-pair minima and per-site product minima."""
        a = np.asarray(couplings)
        return float(
            sum(min_pair_variance(a[j], a[k]) for j, k in self.pairs)
            + sum(min_site_variance(a[i]) for i in self.singletons)
        )


def optimal_pairing(couplings, max_width: int) -> tuple[PairingStructure, float]:
    """Minimum of the pairing bound over all pairings with width <= max_width.

    Pairing particles j, k saves 2a_j^2 + 2a_k^2 - min_pair_variance(a_j, a_k)
    relative to the product state, so the optimum is a maximum-weight matching.
    """
    a = np.asarray(couplings, dtype=float)
    n = a.size
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for j, k in combinations(range(n), 2):
        if k - j + 1 > max_width:
            continue
        saving = min_site_variance(a[j]) + min_site_variance(a[k]) - min_pair_variance(a[j], a[k])
        if saving > 1e-15:
            g.add_edge(j, k, weight=saving)
    matching = nx.max_weight_matching(g, maxcardinality=False)
    pairing = PairingStructure(n, tuple(matching))
    return pairing, pairing.bound(a)


def all_pairings(n: int, max_width: int):
    """Every set of disjoint pairs on range(n) with width <= max_width."""

    def rec(free):
        if not free:
            yield ()
            return
        first, rest = free[0], free[1:]
        yield from rec(rest)
        for other in rest:
            if other - first + 1 <= max_width:
                remaining = tuple(i for i in rest if i != other)
                for tail in rec(remaining):
                    yield ((first, other),) + tail

    yield from rec(tuple(range(n)))


def pairing_bound_bruteforce(couplings, max_width: int) -> float:
    """Exhaustive minimum of the pairing bound (small chains only)."""
    a = np.asarray(couplings, dtype=float)
    return min(PairingStructure(a.size, p).bound(a) for p in all_pairings(a.size, max_width))


def width_bound_nearest_neighbor(n: int) -> tuple[float, float]:
    """(3/2) N (1 - cos(pi/N)) and its large-N form 3 pi^2 / (4N).

    The closed form is the nearest-neighbour singlet pairing on the centred
    chain.  It equals the width-2 optimum when 4 divides N.  For N = 2 mod 4
    the central pair straddles the node (eps = -1), a non-singlet state does
    better there, and the closed form overshoots the true minimum.
    """
    if n < 2 or n % 2:
        raise OddN(f"N={n} must be even and >= 2")
    return 1.5 * n * (1 - math.cos(math.pi / n)), 3 * math.pi**2 / (4 * n)


# -- state builders -------------------------------------------------------------------------


SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
UP = np.array([1, 0], dtype=complex)


def paired_state(n: int, pairs, pair_states=None, site_state=UP) -> np.ndarray:
    """Ket with the given pairs in two-qubit states (singlets by default) and other sites in ``site_state``."""
    pairs = [tuple(p) for p in pairs]
    used = [i for p in pairs for i in p]
    rest = [i for i in range(n) if i not in used]
    pair_states = [SINGLET] * len(pairs) if pair_states is None else list(pair_states)
    psi = np.ones(1, dtype=complex)
    for s in pair_states:
        psi = np.kron(psi, s)
    for _ in rest:
        psi = np.kron(psi, site_state)
    order = used + rest
    return psi.reshape((2,) * n).transpose(np.argsort(order)).reshape(-1)


# -- Fig. 6 style sweep ----------------------------------------------------------------------


FIGURE6_CONFIGS = ("product", "nearest_singlets", "distant_singlets", "bound_w2")


def figure6_sweep(n: int = 16, wavelengths=None) -> list[dict]:
    """(Delta B)^2 against wavelength for a unit-spaced centred chain.

    Rows: wavelength, configuration, value.  Singlets contribute
    3(a_j - a_k)^2, up spins 2a^2.
    """
    if n % 2:
        raise OddN("figure sweep needs an even chain")
    if wavelengths is None:
        wavelengths = np.unique(np.concatenate([np.linspace(2, 4 * n, 121), [n / 2, 2 * n]]))
    rows = []
    near = [(j, j + 1) for j in range(0, n, 2)]
    far = [(j, j + n // 2) for j in range(n // 2)]
    for lam in wavelengths:
        a = SpinEnsemble.chain(n, lam, spacing=1.0).couplings
        values = {
            "product": float(np.sum(2 * a**2)),
            "nearest_singlets": float(sum(3 * (a[j] - a[k]) ** 2 for j, k in near)),
            "distant_singlets": float(sum(3 * (a[j] - a[k]) ** 2 for j, k in far)),
            "bound_w2": optimal_pairing(a, 2)[1],
        }
        rows += [{"wavelength": float(lam), "configuration": c, "value": values[c]} for c in FIGURE6_CONFIGS]
    return rows


# -- entanglement depth ---------------------------------------------------------------------------


def symmetric_spin_ops(k: int):
    """Pauli-convention collective operators of k qubits restricted to the symmetric subspace."""
    j = k / 2
    m = np.arange(j, -j - 1, -1)
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1)
    return (jp + jp.T), (jp - jp.T) / 1j, 2 * np.diag(m)


def _block_stats(psi, ops, blocks):
    jx, jy, jz = ops
    ex = [np.vdot(psi, o @ psi).real for o in ops]
    var = blocks * (np.vdot(psi, jz @ jz @ psi).real - ex[2] ** 2)
    perp2 = np.vdot(psi, (jx @ jx + jy @ jy) @ psi).real
    jperp = blocks * perp2 + blocks * (blocks - 1) * (ex[0] ** 2 + ex[1] ** 2)
    return var, jperp


def depth_bound_value(n: int, k: int, x: float, restarts: int = 32, seed: int = 0) -> float:
    """min (Delta J_z)^2 / J_max over products of n/k identical symmetric k-qubit blocks
    with sqrt(<J_x^2 + J_y^2>) / J_max = x.  NaN where no such state exists."""
    if k < 1 or n % k:
        raise IndivisibleN(f"k={k} does not divide N={n}")
    ops = symmetric_spin_ops(k)
    blocks = n // k

    def unpack(p):
        v = p[: k + 1] + 1j * p[k + 1 :]
        return v / np.linalg.norm(v)

    def constraint(p):
        return math.sqrt(max(_block_stats(unpack(p), ops, blocks)[1], 0)) / n - x

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(restarts):
        res = minimize(
            lambda p: _block_stats(unpack(p), ops, blocks)[0] / n,
            rng.normal(size=2 * k + 2),
            constraints=[{"type": "eq", "fun": constraint}],
            method="SLSQP",
            options={"ftol": 1e-12, "maxiter": 500},
        )
        if res.success and abs(constraint(res.x)) < 1e-7:
            best = min(best, max(float(res.fun), 0.0))
    return best if math.isfinite(best) else math.nan


@dataclass(frozen=True)
class DepthBoundCurve:
    n: int
    k: int
    x: np.ndarray
    f: np.ndarray  # NaN marks grid points the ansatz cannot reach

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.f)

    def is_monotone(self, tol: float = 1e-6) -> bool:
        f = self.f[self.feasible]
        return bool(np.all(np.diff(f) >= -tol))

    def rows(self) -> list[dict]:
        return [
            {"x": float(x), "value": (None if not math.isfinite(f) else float(f)), "configuration": f"k={self.k}"}
            for x, f in zip(self.x, self.f)
        ]


def depth_bound_curve(n: int, k: int, grid=None, restarts: int = 32, seed: int = 0) -> DepthBoundCurve:
    if k < 1 or n % k:
        raise IndivisibleN(f"k={k} does not divide N={n}")
    xs = np.linspace(0, 1, 21) if grid is None else np.asarray(grid, dtype=float)
    f = np.array([depth_bound_value(n, k, x, restarts, seed) for x in xs])
    return DepthBoundCurve(n, k, xs, f)


def depth_bound_k1(n: int, x: float) -> float:
    """Closed form for product states: F = (N x^2 - 2)/(N - 1) on [sqrt(2/N), sqrt(1 + 1/N)]."""
    lo, hi = math.sqrt(2 / n), math.sqrt(1 + 1 / n)
    if not lo - 1e-12 <= x <= hi + 1e-12:
        return math.nan
    return max((n * x * x - 2) / (n - 1), 0.0)


def depth_inequality_slack(state, k: int, restarts: int = 32, seed: int = 0) -> tuple[float, float]:
    """((Delta J_z)^2 / J_max - F_k(x), x) for an N-qubit state; NaN slack if x is out of range."""
    var = collective_variance_J(state, "z")
    x = transverse_length(state)
    ws, kets = _ensemble(state)
    n = _n_qubits(kets.shape[1])
    return var / n - depth_bound_value(n, k, x, restarts, seed), x
