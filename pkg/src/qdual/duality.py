"""Higher-order distinguishability, visibility, coincidence and pair coherence.

All observables are ratios of normally ordered moments with the common
denominator ``<(a1^dag)^k a1^k> + <(a2^dag)^k a2^k>``.  ``D``, ``V`` and ``W``
are invariant under rescaling the ket; ``C`` is not (it carries the
denominator squared), so it is evaluated on whatever normalisation the
caller supplies.

The maximisation over the interferometer phase is done analytically through
the modulus of the complex moment.  Only :func:`reconstruct_visibility`
works from a finite phase grid, mirroring what a detector scan would record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, UndefinedObservable
from .fock import Mixture, State, TwoModeState, beam_splitter, moment, phase_shift
from .verdict import VIOLATION_TOL, CriterionVerdict


@dataclass(frozen=True)
class _Moments:
    n1: float  # <(a1^dag)^k a1^k>
    n2: float
    cross: complex  # <(a1^dag)^k a2^k>
    coinc: float  # <(a1^dag)^k a1^k (a2^dag)^k a2^k>
    pair: complex  # <a1^k a2^k>

    @property
    def denominator(self) -> float:
        return self.n1 + self.n2


def _moments(state: State, k: int) -> _Moments:
    if k < 1:
        raise ValueError("order k must be >= 1")
    return _Moments(
        n1=moment(state, k, k, 0, 0).real,
        n2=moment(state, 0, 0, k, k).real,
        cross=moment(state, k, 0, 0, k),
        coinc=moment(state, k, k, k, k).real,
        pair=moment(state, 0, k, 0, k),
    )


def _denominator(m: _Moments, k: int) -> float:
    den = m.denominator
    if den <= 1e-300:
        raise UndefinedObservable(f"no population with at least {k} photons in one mode")
    return den


def distinguishability(state: State, k: int = 1) -> float:
    m = _moments(state, k)
    return abs(m.n1 - m.n2) / _denominator(m, k)


def visibility(state: State, k: int = 1) -> float:
    m = _moments(state, k)
    return 2 * abs(m.cross) / _denominator(m, k)


def coincidence(state: State, k: int = 1) -> float:
    m = _moments(state, k)
    return m.coinc / _denominator(m, k) ** 2


def pair_coherence(state: State, k: int = 1) -> float:
    """W_k = 2|<a1^k a2^k>| / denominator."""
    m = _moments(state, k)
    return 2 * abs(m.pair) / _denominator(m, k)


@dataclass(frozen=True)
class DualityReport:
    """Duality observables of order ``k``; all ``None`` when undefined."""

    k: int
    D: float | None
    V: float | None
    C: float | None
    W: float | None
    denominator: float
    phase: float | None  # interferometer phase maximising <V_k>
    defined: bool = True

    @property
    def duality_slack(self) -> float | None:
        if not self.defined:
            return None
        return 1.0 - self.D**2 - self.V**2

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "defined": self.defined,
            "D": self.D,
            "V": self.V,
            "C": self.C,
            "W": self.W,
            "duality_slack": self.duality_slack,
            "denominator": self.denominator,
            "phase": self.phase,
        }


def duality_check(state: State, k: int = 1) -> DualityReport:
    m = _moments(state, k)
    den = m.denominator
    if den <= 1e-300:
        return DualityReport(k, None, None, None, None, den, None, defined=False)
    return DualityReport(
        k=k,
        D=abs(m.n1 - m.n2) / den,
        V=2 * abs(m.cross) / den,
        C=m.coinc / den**2,
        W=2 * abs(m.pair) / den,
        denominator=den,
        phase=-float(np.angle(m.cross)) if abs(m.cross) > 0 else 0.0,
    )


def first_order_slack(state: State) -> float:
    """1 - D^2 - V^2 via 4(<n1><n2> - |<a1^dag a2>|^2)/(<n1>+<n2>)^2."""
    m = _moments(state, 1)
    den = _denominator(m, 1)
    return 4 * (m.n1 * m.n2 - abs(m.cross) ** 2) / den**2


# -- phase-grid reconstruction ---------------------------------------------------


@dataclass(frozen=True)
class PhaseScan:
    """Detector records R^(+/-)_{k,phi} on the two grids needed for one order k.

    ``sign`` is ``-`` (difference of the output detectors) for odd ``k`` and
    ``+`` (sum) for even ``k``.  ``real_grid`` starts at ``base_phase``;
    ``imag_grid`` is offset by ``-pi/(2k)``.
    """

    k: int
    base_phase: float
    sign: str
    real_grid: tuple = field(default_factory=tuple)  # ((phi, R), ...)
    imag_grid: tuple = field(default_factory=tuple)


def scan_phases(k: int, base_phase: float) -> tuple[list[float], list[float]]:
    """Phases at which R must be recorded for order ``k``."""
    step = 2 * math.pi / k if k % 2 else math.pi / k
    first = [base_phase + m * step for m in range(k)]
    second = [base_phase - math.pi / (2 * k) + m * step for m in range(k)]
    return first, second


def detector_record(state: TwoModeState, k: int, phi: float, sign: str) -> float:
    """R^(sign)_{k,phi} = 2^(k-1)/k <(a3^dag)^k a3^k (+/-) (a4^dag)^k a4^k>.

    Computed by propagating the state: phase shift on mode 1, then the beam
    splitter, then k-th order detection on both outputs.
    """
    if isinstance(state, Mixture):
        return sum(w * detector_record(s, k, phi, sign) for w, s in zip(state.weights, state.states))
    n1, n2 = np.nonzero(state.amplitudes)
    total = int(np.max(n1 + n2)) if len(n1) else 0
    work = state.with_cutoff(max(state.cutoff, total))
    out = beam_splitter(phase_shift(work, 1, phi))
    m3 = moment(out, k, k, 0, 0).real
    m4 = moment(out, 0, 0, k, k).real
    value = m3 - m4 if sign == "-" else m3 + m4
    return 2 ** (k - 1) / k * value


def measure_phase_scan(state: State, k: int, base_phase: float = 0.0) -> PhaseScan:
    sign = "-" if k % 2 else "+"
    first, second = scan_phases(k, base_phase)
    return PhaseScan(
        k=k,
        base_phase=base_phase,
        sign=sign,
        real_grid=tuple((p, detector_record(state, k, p, sign)) for p in first),
        imag_grid=tuple((p, detector_record(state, k, p, sign)) for p in second),
    )


def reconstruct_visibility(scan: PhaseScan, k: int | None = None) -> float:
    """Return 2|<(a1^dag)^k a2^k>| from a phase scan.

    The squared combinations of grid sums give (2|<(a1^dag)^k a2^k>|)^2;
    even orders use an alternating sum.
    """
    k = scan.k if k is None else k
    if k != scan.k:
        raise GridMismatch(f"scan recorded for k={scan.k}, requested k={k}")
    expected_sign = "-" if k % 2 else "+"
    if scan.sign != expected_sign:
        raise GridMismatch(f"order {k} needs R^{expected_sign} records")
    first, second = scan_phases(k, scan.base_phase)
    for grid, expected in ((scan.real_grid, first), (scan.imag_grid, second)):
        phases = [p for p, _ in grid]
        if len(phases) != len(expected) or not np.allclose(phases, expected, atol=1e-12, rtol=0):
            raise GridMismatch(f"phases {phases} do not match required grid {expected}")
    signs = np.ones(k) if k % 2 else (-1.0) ** np.arange(k)
    s_re = float(np.dot(signs, [r for _, r in scan.real_grid]))
    s_im = float(np.dot(signs, [r for _, r in scan.imag_grid]))
    return math.sqrt(s_re**2 + s_im**2)


# -- entanglement tests built from duality observables ----------------------------


def entanglement_by_visibility(state: State, k: int = 1, tol: float = VIOLATION_TOL):
    """Separable states satisfy V_k^2 <= 4 C_k."""
    r = duality_check(state, k)
    if not r.defined:
        raise UndefinedObservable(f"order-{k} observables undefined for this state")
    return CriterionVerdict.from_sides(
        f"V{k}^2<=4C{k}", r.V**2, 4 * r.C, "entangled", tol, details={"V": r.V, "C": r.C}
    )


def entanglement_by_distinguishability(state: State, k: int = 1, tol: float = VIOLATION_TOL):
    """Separable states satisfy D_k^2 + W_k^2 <= 1."""
    r = duality_check(state, k)
    if not r.defined:
        raise UndefinedObservable(f"order-{k} observables undefined for this state")
    return CriterionVerdict.from_sides(
        f"D{k}^2+W{k}^2<=1", r.D**2 + r.W**2, 1.0, "entangled", tol, details={"D": r.D, "W": r.W}
    )
