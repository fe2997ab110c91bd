"""Information-theoretic group-fairness audit.

With sensitive attribute ``Z``, prediction ``Yhat`` and label ``Y``:

* statistical parity gap ``I(Z; Yhat)``
* equalized odds gap ``I(Z; Yhat | Y)``
* predictive parity gap ``I(Z; Y | Yhat)``

Taking ``A = Yhat`` and ``B = Y`` in the PID of ``I(Z; Yhat, Y)``::

    sp = Uni(Z:Yhat|Y) + Red        eo = Uni(Z:Yhat|Y) + Syn
    pp = Uni(Z:Y|Yhat) + Syn        I(Z;Y) = Uni(Z:Y|Yhat) + Red

The ``check_*`` functions test the relations between the gaps implied by this
decomposition. Each returns a :class:`TheoremVerdict`; when its premise does
not hold the check passes vacuously with ``premise=False``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dist import JointDist, conditional_mutual_information, joint_mutual_information, mutual_information
from .pid import PidDecomposition, decompose
from .solver import SolverConfig

THRESHOLD = 1e-6


@dataclass(frozen=True)
class FairnessGaps:
    """The three fairness gaps and the label dependence ``I(Z;Y)``, in bits."""

    sp_gap: float
    eo_gap: float
    pp_gap: float
    dataset_mi: float

    @property
    def chain_defect(self) -> float:
        """``sp + pp - eo - I(Z;Y)``; both sides equal ``I(Z; Yhat, Y)``."""
        return self.sp_gap + self.pp_gap - self.eo_gap - self.dataset_mi


def compute_gaps(dist: JointDist) -> FairnessGaps:
    return FairnessGaps(
        sp_gap=mutual_information(dist, "z", "yhat"),
        eo_gap=conditional_mutual_information(dist, "z", "yhat", "y"),
        pp_gap=conditional_mutual_information(dist, "z", "y", "yhat"),
        dataset_mi=mutual_information(dist, "z", "y"),
    )


@dataclass(frozen=True)
class TheoremVerdict:
    """Outcome of one relation check.

    ``margin`` is the slack by which the conclusion held (negative when it
    failed); ``None`` when the premise did not hold and nothing was tested.
    """

    name: str
    premise: bool
    holds: bool
    margin: float | None
    detail: str = ""


@dataclass(frozen=True, eq=False)
class FairnessAudit:
    gaps: FairnessGaps
    pid: PidDecomposition
    theorems: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.pid.converged

    @property
    def breaches(self) -> list[str]:
        return [name for name, v in self.theorems.items() if not v.holds]

    def identity_defects(self) -> dict[str, float]:
        """Signed defects of the four gap/PID identities."""
        g, p = self.gaps, self.pid
        return {
            "sp": g.sp_gap - (p.uni_a + p.red),
            "eo": g.eo_gap - (p.uni_a + p.syn),
            "pp": g.pp_gap - (p.uni_b + p.syn),
            "dataset_mi": g.dataset_mi - (p.uni_b + p.red),
        }


def _positive(x: float) -> bool:
    return x > THRESHOLD


def check_impossibility(audit: FairnessAudit, total_mi: float | None = None) -> TheoremVerdict:
    """Some gap is positive exactly when ``I(Z; Yhat, Y)`` is positive."""
    g = audit.gaps
    total = audit.pid.total if total_mi is None else total_mi
    named = {"sp": g.sp_gap, "eo": g.eo_gap, "pp": g.pp_gap}
    worst = max(named.values())
    positive = [k for k, v in named.items() if _positive(v)]
    if _positive(total):
        margin = worst - THRESHOLD
        detail = "positive gaps: " + (", ".join(positive) or "none")
        return TheoremVerdict("t1", True, margin > 0, margin, detail)
    margin = THRESHOLD - worst
    return TheoremVerdict("t1", False, margin >= 0, margin, "total is zero; all gaps must vanish")


def check_dataset_relation(audit: FairnessAudit) -> TheoremVerdict:
    """``I(Z;Y) = Uni(Z:Y|Yhat) + Red``, and if ``I(Z;Y) > 0`` then sp or pp is positive."""
    g, p = audit.gaps, audit.pid
    identity_margin = THRESHOLD - abs(g.dataset_mi - (p.uni_b + p.red))
    if not _positive(g.dataset_mi):
        return TheoremVerdict("t2", False, identity_margin >= 0, identity_margin, "I(Z;Y) is zero; identity only")
    gap_margin = max(g.sp_gap, g.pp_gap) - THRESHOLD
    holds = identity_margin >= 0 and gap_margin > 0
    return TheoremVerdict("t2", True, holds, min(identity_margin, gap_margin), "identity and positivity")


def _dominance(name, premise_gap, bigger, smaller, dataset_mi):
    if _positive(premise_gap):
        return TheoremVerdict(name, False, True, None, "premise not met")
    margin = bigger - smaller + THRESHOLD
    detail = "dominance"
    if not _positive(dataset_mi):
        margin = min(margin, THRESHOLD - abs(bigger - smaller))
        detail = "equality"
    return TheoremVerdict(name, True, margin >= 0, margin, detail)


def check_sp_zero_regime(audit: FairnessAudit) -> TheoremVerdict:
    """With ``sp = 0``: ``pp >= eo``, with equality when also ``I(Z;Y) = 0``."""
    g = audit.gaps
    return _dominance("t3", g.sp_gap, g.pp_gap, g.eo_gap, g.dataset_mi)


def check_pp_zero_regime(audit: FairnessAudit) -> TheoremVerdict:
    """With ``pp = 0``: ``sp >= eo``, with equality when also ``I(Z;Y) = 0``."""
    g = audit.gaps
    return _dominance("t4", g.pp_gap, g.sp_gap, g.eo_gap, g.dataset_mi)


def check_eo_zero_tradeoff(audit: FairnessAudit) -> TheoremVerdict:
    """With ``eo = 0`` and ``I(Z;Y) > 0``: ``sp + pp = I(Z;Y)``."""
    g = audit.gaps
    if _positive(g.eo_gap) or not _positive(g.dataset_mi):
        return TheoremVerdict("t5", False, True, None, "premise not met")
    margin = THRESHOLD - abs(g.sp_gap + g.pp_gap - g.dataset_mi)
    return TheoremVerdict("t5", True, margin >= 0, margin, "tradeoff")


CHECKS = (
    check_impossibility,
    check_dataset_relation,
    check_sp_zero_regime,
    check_pp_zero_regime,
    check_eo_zero_tradeoff,
)


def audit(dist: JointDist, cfg: SolverConfig | None = None) -> FairnessAudit:
    """Gaps, their decomposition, and every relation check."""
    result = FairnessAudit(compute_gaps(dist), decompose(dist, "z", cfg))
    verdicts = {}
    for check in CHECKS:
        v = check(result)
        verdicts[v.name] = v
    object.__setattr__(result, "theorems", verdicts)
    return result


def total_information(dist: JointDist) -> float:
    """``I(Z; Yhat, Y)``."""
    return joint_mutual_information(dist, "z")


__all__ = [
    "THRESHOLD",
    "FairnessAudit",
    "FairnessGaps",
    "TheoremVerdict",
    "audit",
    "check_dataset_relation",
    "check_eo_zero_tradeoff",
    "check_impossibility",
    "check_pp_zero_regime",
    "check_sp_zero_regime",
    "compute_gaps",
    "total_information",
]
