"""Truncated two-mode bosonic Fock space.

A pure state is an amplitude array ``amp[n1, n2]`` for ``0 <= n1, n2 <= cutoff``
(row-major, mode 1 outer, mode 2 inner).  Mixed states are kept as weighted
ensembles of pure states, because every observable used here is a normally
ordered moment and moments are linear in the ensemble.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from ._expr import evaluate
from .errors import CutoffExceeded, StateParseError

DEFAULT_CUTOFF = 8

# Output-mode convention of the 50:50 beam splitter: a3 = (a1 + a2)/sqrt2, a4 = (a1 - a2)/sqrt2.
BEAM_SPLITTER_CONVENTION = "a3=(a1+a2)/sqrt2, a4=(a1-a2)/sqrt2"


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Pure two-mode state; ``amplitudes`` has shape (cutoff+1, cutoff+1).

    Amplitudes are not forced to unit norm: raising/lowering results and
    literal kets are kept unnormalised until :meth:`normalized` is called.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
            raise ValueError("amplitudes must be a square (cutoff+1)x(cutoff+1) array")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @classmethod
    def basis(cls, n1: int, n2: int, cutoff: int = DEFAULT_CUTOFF) -> "TwoModeState":
        if max(n1, n2) > cutoff:
            raise CutoffExceeded(f"|{n1},{n2}> exceeds cutoff {cutoff}")
        amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        amp[n1, n2] = 1.0
        return cls(amp)

    @classmethod
    def from_terms(cls, terms, cutoff: int = DEFAULT_CUTOFF, normalize: bool = True):
        """Build from ``{(n1, n2): coefficient}``."""
        amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        for (n1, n2), c in dict(terms).items():
            if max(n1, n2) > cutoff:
                raise CutoffExceeded(f"|{n1},{n2}> exceeds cutoff {cutoff}")
            amp[n1, n2] += c
        state = cls(amp)
        return state.normalized() if normalize else state

    @classmethod
    def product(cls, mode1: Sequence[complex], mode2: Sequence[complex], cutoff=None):
        """Product of two single-mode amplitude vectors."""
        m1 = np.asarray(mode1, dtype=complex)
        m2 = np.asarray(mode2, dtype=complex)
        c = cutoff if cutoff is not None else max(len(m1), len(m2)) - 1
        amp = np.zeros((c + 1, c + 1), dtype=complex)
        amp[: len(m1), : len(m2)] = np.outer(m1, m2)
        return cls(amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_zero(self, tol: float = 1e-14) -> bool:
        return self.norm() <= tol

    def normalized(self) -> "TwoModeState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalise the zero vector")
        return TwoModeState(self.amplitudes / n)

    def with_cutoff(self, cutoff: int) -> "TwoModeState":
        c = self.cutoff
        if cutoff < c and (
            np.any(self.amplitudes[cutoff + 1 :, :]) or np.any(self.amplitudes[:, cutoff + 1 :])
        ):
            raise CutoffExceeded(f"populated levels above new cutoff {cutoff}")
        amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        m = min(c, cutoff) + 1
        amp[:m, :m] = self.amplitudes[:m, :m]
        return TwoModeState(amp)

    def vector(self) -> np.ndarray:
        """Flattened amplitudes in the frozen row-major basis order."""
        return self.amplitudes.reshape(-1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "cutoff": self.cutoff,
                "order": "row-major (n1 outer, n2 inner)",
                "amplitudes": [[float(z.real), float(z.imag)] for z in self.vector()],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "TwoModeState":
        data = json.loads(text)
        c = data["cutoff"]
        vec = np.array([complex(re_, im) for re_, im in data["amplitudes"]])
        return cls(vec.reshape(c + 1, c + 1))


@dataclass(frozen=True, eq=False)
class Mixture:
    """Convex ensemble of pure two-mode states."""

    weights: tuple
    states: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.states) or not w:
            raise ValueError("weights and states must be non-empty and of equal length")
        if min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        cutoffs = {s.cutoff for s in self.states}
        if len(cutoffs) != 1:
            raise ValueError("all ensemble members must share one cutoff")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def cutoff(self) -> int:
        return self.states[0].cutoff


State = Union[TwoModeState, Mixture]


def _check_mode(mode: int) -> int:
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    return mode - 1


def apply_creation(state: TwoModeState, mode: int) -> TwoModeState:
    """a_mode^dagger |psi>; unnormalised."""
    ax = _check_mode(mode)
    amp = np.moveaxis(state.amplitudes, ax, 0)
    if np.any(amp[-1] != 0):
        raise CutoffExceeded(f"a{mode}^dagger would populate level {state.cutoff + 1}")
    out = np.zeros_like(amp)
    n = np.arange(1, state.cutoff + 1)
    out[1:] = np.sqrt(n)[:, None] * amp[:-1]
    return TwoModeState(np.moveaxis(out, 0, ax))


def apply_annihilation(state: TwoModeState, mode: int) -> TwoModeState:
    """a_mode |psi>; the vacuum maps to the zero vector."""
    ax = _check_mode(mode)
    amp = np.moveaxis(state.amplitudes, ax, 0)
    out = np.zeros_like(amp)
    n = np.arange(1, state.cutoff + 1)
    out[:-1] = np.sqrt(n)[:, None] * amp[1:]
    return TwoModeState(np.moveaxis(out, 0, ax))


def phase_shift(state: TwoModeState, mode: int, phi: float) -> TwoModeState:
    """Apply exp(-i phi n_mode)."""
    ax = _check_mode(mode)
    n = np.arange(state.cutoff + 1)
    phase = np.exp(-1j * phi * n)
    amp = state.amplitudes * (phase[:, None] if ax == 0 else phase[None, :])
    return TwoModeState(amp)


@lru_cache(maxsize=None)
def _beam_splitter_matrix(cutoff: int) -> np.ndarray:
    dim = cutoff + 1
    u = np.zeros((dim * dim, dim * dim))
    for n1 in range(dim):
        for n2 in range(dim - n1):
            total = n1 + n2
            pref = 1.0 / math.sqrt(math.factorial(n1) * math.factorial(n2) * 2.0**total)
            col = n1 * dim + n2
            # (b3+b4)^n1 (b3-b4)^n2, expanded in powers of b3
            for i in range(n1 + 1):
                for j in range(n2 + 1):
                    m3 = i + j
                    m4 = total - m3
                    coeff = math.comb(n1, i) * math.comb(n2, j) * (-1) ** (n2 - j)
                    u[m3 * dim + m4, col] += (
                        pref * coeff * math.sqrt(math.factorial(m3) * math.factorial(m4))
                    )
    return u


def beam_splitter(state: TwoModeState) -> TwoModeState:
    """50:50 beam splitter; the result is expressed in the output modes (a3, a4)."""
    c = state.cutoff
    n1, n2 = np.nonzero(state.amplitudes)
    if len(n1) and np.max(n1 + n2) > c:
        raise CutoffExceeded(
            f"total photon number {int(np.max(n1 + n2))} exceeds cutoff {c} of the output modes"
        )
    out = _beam_splitter_matrix(c) @ state.vector()
    return TwoModeState(out.reshape(c + 1, c + 1))


def _lower(amp: np.ndarray, k1: int, k2: int) -> np.ndarray:
    """Apply a1^k1 a2^k2 to an amplitude array."""
    dim = amp.shape[0]
    out = amp
    for _ in range(k1):
        nxt = np.zeros_like(out)
        nxt[:-1] = np.sqrt(np.arange(1, dim))[:, None] * out[1:]
        out = nxt
    for _ in range(k2):
        nxt = np.zeros_like(out)
        nxt[:, :-1] = np.sqrt(np.arange(1, dim))[None, :] * out[:, 1:]
        out = nxt
    return out


def moment(state: State, cr1: int = 0, an1: int = 0, cr2: int = 0, an2: int = 0) -> complex:
    """<(a1^dag)^cr1 a1^an1 (a2^dag)^cr2 a2^an2>.

    Pure states are not renormalised, so the value is the raw quadratic form
    <psi|M|psi>.  Ensembles return the weighted sum of member moments.
    """
    if isinstance(state, Mixture):
        return sum(w * moment(s, cr1, an1, cr2, an2) for w, s in zip(state.weights, state.states))
    amp = state.amplitudes
    bra = _lower(amp, cr1, cr2)
    ket = _lower(amp, an1, an2)
    return complex(np.vdot(bra, ket))


def mean_photon_numbers(state: State) -> tuple[float, float]:
    return moment(state, 1, 1, 0, 0).real, moment(state, 0, 0, 1, 1).real


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:\((?P<coef>[^|]*?)\)|(?P<num>\d+(?:\.\d*)?))?\s*\*?\s*
        \|\s*(?P<n1>\d+)\s*,\s*(?P<n2>\d+)\s*>""",
    re.VERBOSE,
)


def parse_ket(text: str, cutoff: int = DEFAULT_CUTOFF, normalize: bool = True) -> TwoModeState:
    """Parse ``"(c) |n1,n2> + (c') |m1,m2> ..."``.

    Coefficients are arithmetic expressions (``1/sqrt(2)``, ``exp(i*pi/4)``);
    a missing coefficient means 1.
    """
    terms: dict[tuple[int, int], complex] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise StateParseError(f"cannot parse ket literal near: {text[pos:]!r}")
        if pos > 0 and m.group("sign") is None:
            raise StateParseError(f"missing '+' or '-' between terms near: {text[pos:]!r}")
        coef = 1.0
        if m.group("coef") is not None:
            try:
                coef = evaluate(m.group("coef"))
            except (ValueError, SyntaxError, ZeroDivisionError) as exc:
                raise StateParseError(str(exc)) from exc
        elif m.group("num") is not None:
            coef = float(m.group("num"))
        if m.group("sign") == "-":
            coef = -coef
        key = (int(m.group("n1")), int(m.group("n2")))
        terms[key] = terms.get(key, 0) + coef
        pos = m.end()
    if not terms:
        raise StateParseError("empty ket literal")
    return TwoModeState.from_terms(terms, cutoff=cutoff, normalize=normalize)


def parse_state(text: str, cutoff: int = DEFAULT_CUTOFF) -> State:
    """Parse a ket literal or an ensemble ``"w1: ket1 ; w2: ket2"``."""
    if ";" not in text and not re.match(r"^\s*[^|(]*:", text):
        return parse_ket(text, cutoff)
    weights, states = [], []
    for part in text.split(";"):
        if not part.strip():
            continue
        w, _, ket = part.partition(":")
        weights.append(evaluate(w).real)
        states.append(parse_ket(ket, cutoff))
    return Mixture(tuple(weights), tuple(states))
