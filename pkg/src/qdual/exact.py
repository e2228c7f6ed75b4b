"""Exact rational evaluation of two-mode moments.

Kets carry rational coefficients and need not be normalised.  Ladder
operators contribute square-root factors sqrt(n!/(n-q)!); a moment is an
inner product of two lowered kets, so each contribution is a rational times
sqrt(R1 R2).  When R1 R2 is a perfect square the result stays rational,
which covers every tabulated state; otherwise :class:`NotRational` is raised.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import QdualError, StateParseError

ExactKet = dict  # {(n1, n2): Fraction}


class NotRational(QdualError):
    pass


_TERM = re.compile(r"\s*(?P<sign>[+-])?\s*(?:\((?P<coef>[^|()]*)\)|(?P<num>\d+(?:/\d+)?))?\s*\|\s*(?P<n1>\d+)\s*,\s*(?P<n2>\d+)\s*>")


def parse_exact_ket(text: str) -> ExactKet:
    """Ket literal with rational coefficients, e.g. ``"|4,2> + |2,4>"`` or ``"(3/2)|0,1>"``."""
    out: ExactKet = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise StateParseError(f"not a rational ket literal near {text[pos:]!r}")
        raw = m.group("coef") or m.group("num") or "1"
        try:
            c = Fraction(raw.replace(" ", ""))
        except ValueError as exc:
            raise StateParseError(f"coefficient {raw!r} is not rational") from exc
        if m.group("sign") == "-":
            c = -c
        key = (int(m.group("n1")), int(m.group("n2")))
        out[key] = out.get(key, Fraction(0)) + c
        pos = m.end()
    return out


def parse_exact_state(text: str) -> list[tuple[Fraction, ExactKet]]:
    """A ket, or an ensemble ``"w1: ket ; w2: ket"`` with rational weights."""
    if ":" not in text:
        return [(Fraction(1), parse_exact_ket(text))]
    out = []
    for part in text.split(";"):
        if part.strip():
            w, _, ket = part.partition(":")
            out.append((Fraction(w.strip()), parse_exact_ket(ket)))
    return out


def _lower(ket: ExactKet, q1: int, q2: int) -> dict:
    """a1^q1 a2^q2 |ket> as {(n1, n2): (coef, radicand)}."""
    out = {}
    for (n1, n2), c in ket.items():
        if n1 < q1 or n2 < q2 or c == 0:
            continue
        rad = math.perm(n1, q1) * math.perm(n2, q2)
        out[(n1 - q1, n2 - q2)] = (c, rad)
    return out


def raw_moment(ket: ExactKet, cr1: int = 0, an1: int = 0, cr2: int = 0, an2: int = 0) -> Fraction:
    """<ket| (a1^dag)^cr1 a1^an1 (a2^dag)^cr2 a2^an2 |ket> without normalisation.

    Only real rational kets are supported, so the result is real.
    """
    left = _lower(ket, cr1, cr2)
    right = _lower(ket, an1, an2)
    total = Fraction(0)
    for key, (c1, r1) in left.items():
        if key in right:
            c2, r2 = right[key]
            root = math.isqrt(r1 * r2)
            if root * root != r1 * r2:
                raise NotRational(f"sqrt({r1 * r2}) is irrational")
            total += c1 * c2 * root
    return total


def norm2(ket: ExactKet) -> Fraction:
    return sum((c * c for c in ket.values()), Fraction(0))


def moment(state, cr1=0, an1=0, cr2=0, an2=0, normalise: bool = True) -> Fraction:
    total = Fraction(0)
    for w, ket in state:
        m = raw_moment(ket, cr1, an1, cr2, an2)
        total += w * (m / norm2(ket) if normalise else m)
    return total


def observables(state, k: int = 1, normalise: bool = True) -> dict | None:
    """Exact D_k, V_k, C_k, W_k; None when the denominator vanishes."""
    n1 = moment(state, k, k, 0, 0, normalise)
    n2 = moment(state, 0, 0, k, k, normalise)
    den = n1 + n2
    if den == 0:
        return None
    return {
        "D": abs(n1 - n2) / den,
        "V": 2 * abs(moment(state, k, 0, 0, k, normalise)) / den,
        "C": moment(state, k, k, k, k, normalise) / den**2,
        "W": 2 * abs(moment(state, 0, k, 0, k, normalise)) / den,
    }
