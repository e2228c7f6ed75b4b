from dataclasses import dataclass

VIOLATION_TOL = 1e-10

HINTS = ("entangled", "NPT", "GME-witnessed", "not-fully-separable", "inconclusive")


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of one inequality test ``lhs <= rhs``.

    ``violated`` is true when ``lhs - rhs`` exceeds the tolerance; ``hint``
    then names what the violation certifies, otherwise it is ``inconclusive``.
    """

    criterion: str
    lhs: float
    rhs: float
    violated: bool
    margin: float
    hint: str
    details: dict | None = None

    @classmethod
    def from_sides(cls, criterion, lhs, rhs, hint_if_violated, tol=VIOLATION_TOL, details=None):
        lhs = float(lhs)
        rhs = float(rhs)
        margin = lhs - rhs
        violated = margin > tol
        return cls(
            criterion=criterion,
            lhs=lhs,
            rhs=rhs,
            violated=violated,
            margin=margin,
            hint=hint_if_violated if violated else "inconclusive",
            details=details,
        )

    def to_dict(self) -> dict:
        out = {
            "criterion": self.criterion,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violated": self.violated,
            "margin": self.margin,
            "hint": self.hint,
        }
        if self.details:
            out["details"] = self.details
        return out
