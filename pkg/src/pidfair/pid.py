"""Bivariate partial information decomposition and Blackwell sufficiency.

For a target ``Z`` and sources ``A``, ``B`` the total ``I(Z; A, B)`` splits
into four nonnegative parts::

    I(Z; A, B) = Uni(Z:A|B) + Uni(Z:B|A) + Red(Z:A,B) + Syn(Z:A,B)

Both unique terms come from the convex program in :mod:`pidfair.solver`; the
redundant and synergistic parts follow from ``Red = I(Z;A) - Uni(Z:A|B)`` and
the total.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .dist import AXIS, VARIABLES, JointDist, joint_mutual_information, mi_array, mutual_information
from .polytope import MarginalPolytope
from .solver import SolverConfig, SolverResult, construct_q0, unique_information

BLACKWELL_TOL = 1e-8


def _sources(target: str) -> tuple[str, str]:
    if target not in AXIS:
        raise ValueError(f"unknown variable {target!r}; expected one of {VARIABLES}")
    a, b = (v for v in VARIABLES if v != target)
    return a, b


@dataclass(frozen=True, eq=False)
class PidDecomposition:
    """The four PID terms of ``I(target; A, B)`` in bits.

    Terms within the solver tolerance of zero are reported as exactly zero;
    ``raw`` keeps the unclamped values. ``residual`` is the defect of the
    identity ``Uni(Z:B|A) + Red = I(Z;B)``, which holds exactly at the true
    optimum and so measures how far the two independent solves disagree.
    """

    target: str
    source_a: str
    source_b: str
    uni_a: float
    uni_b: float
    red: float
    syn: float
    total: float
    residual: float
    converged: bool
    solver_a: SolverResult = field(repr=False)
    solver_b: SolverResult = field(repr=False)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def terms(self) -> tuple[float, float, float, float]:
        """``(uni_a, uni_b, red, syn)``."""
        return self.uni_a, self.uni_b, self.red, self.syn

    @property
    def certified_gap(self) -> float:
        """Worse of the two solver certificates, in bits."""
        return max(self.solver_a.certified_gap, self.solver_b.certified_gap)

    @property
    def iterations(self) -> int:
        return self.solver_a.iterations + self.solver_b.iterations


def _clamp(value: float, tol: float) -> float:
    return 0.0 if abs(value) <= tol else value


def decompose(dist: JointDist, target: str = "z", cfg: SolverConfig | None = None) -> PidDecomposition:
    """PID of ``I(target; A, B)`` where ``A, B`` are the other two variables in
    ``(z, yhat, y)`` order; with the default target, ``A`` is the prediction
    and ``B`` the label.

    Non-convergence of either solve is not an error: ``converged`` is false
    and both certificates remain available on ``solver_a`` / ``solver_b``.
    """
    cfg = cfg or SolverConfig()
    a, b = _sources(target)
    poly = MarginalPolytope.from_dist(dist, target=target, source=a)
    res_a = unique_information(poly, cfg)
    res_b = unique_information(poly.swapped(), cfg)
    i_a = mutual_information(dist, target, a)
    i_b = mutual_information(dist, target, b)
    total = joint_mutual_information(dist, target)
    uni_a, uni_b = res_a.objective, res_b.objective
    red = i_a - uni_a
    syn = total - uni_a - uni_b - red
    raw = {"uni_a": uni_a, "uni_b": uni_b, "red": red, "syn": syn, "i_a": i_a, "i_b": i_b}
    return PidDecomposition(
        target=target,
        source_a=a,
        source_b=b,
        uni_a=_clamp(uni_a, cfg.tol),
        uni_b=_clamp(uni_b, cfg.tol),
        red=_clamp(red, cfg.tol),
        syn=_clamp(syn, cfg.tol),
        total=total,
        residual=uni_b + red - i_b,
        converged=res_a.converged and res_b.converged,
        solver_a=res_a,
        solver_b=res_b,
        raw=raw,
    )


@dataclass(frozen=True, eq=False)
class BlackwellVerdict:
    """Whether the channel ``target -> sufficient`` can be garbled into
    ``target -> degraded``.

    ``channel`` is a row-stochastic witness ``T[b, a]`` when feasible;
    ``residual`` is the smallest achievable L1 mismatch.
    """

    target: str
    sufficient: str
    degraded: str
    feasible: bool
    residual: float
    channel: np.ndarray | None = field(default=None, repr=False)


def blackwell_check(
    dist: JointDist, target: str = "z", candidate_sufficient: str = "y", tol: float = BLACKWELL_TOL
) -> BlackwellVerdict:
    """Test ``P(A|Z) = P(B|Z) T`` for some row-stochastic ``T``.

    ``B`` is ``candidate_sufficient`` and ``A`` the remaining variable. Target
    values with zero probability impose no constraint. The linear program
    minimizes the L1 mismatch, so an infeasible instance still reports how
    far it is from being degraded.
    """
    if candidate_sufficient == target or candidate_sufficient not in AXIS:
        raise ValueError("candidate_sufficient must be a non-target variable")
    degraded = next(v for v in VARIABLES if v not in (target, candidate_sufficient))
    p = np.transpose(dist.probs, (AXIS[target], AXIS[degraded], AXIS[candidate_sufficient]))
    p_z = p.sum(axis=(1, 2))
    keep = p_z > 0
    p_a = p.sum(axis=2)[keep] / p_z[keep, None]
    p_b = p.sum(axis=1)[keep] / p_z[keep, None]
    nz, na = p_a.shape
    nb = p_b.shape[1]
    n_t = nb * na
    n_s = nz * na
    # variables: T (row-major b, a), then positive and negative slacks
    cost = np.concatenate([np.zeros(n_t), np.ones(2 * n_s)])
    A_eq = np.zeros((n_s + nb, n_t + 2 * n_s))
    b_eq = np.zeros(n_s + nb)
    for z in range(nz):
        for a in range(na):
            row = z * na + a
            A_eq[row, a:n_t:na] = p_b[z]
            A_eq[row, n_t + row] = 1.0
            A_eq[row, n_t + n_s + row] = -1.0
            b_eq[row] = p_a[z, a]
    for b in range(nb):
        A_eq[n_s + b, b * na:(b + 1) * na] = 1.0
        b_eq[n_s + b] = 1.0
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"Blackwell feasibility LP failed: {res.message}")
    residual = max(float(res.fun), 0.0)
    feasible = residual <= tol
    channel = None
    if feasible:
        channel = np.clip(res.x[:n_t].reshape(nb, na), 0.0, None)
        channel /= channel.sum(axis=1, keepdims=True)
    return BlackwellVerdict(target, candidate_sufficient, degraded, feasible, residual, channel)


def redundancy_lower_bound(dist: JointDist, target: str = "z") -> float:
    """``I(A;B)`` under the conditionally independent coupling, in bits.

    Redundancy is never smaller than this value.
    """
    _sources(target)
    q0 = construct_q0(dist, target)
    pab = q0.probs.sum(axis=AXIS[target])
    # remaining axes keep (z, yhat, y) order, so pab is indexed (a, b)
    value = mi_array(pab)
    return 0.0 if -1e-12 < value < 0 else value


__all__ = [
    "BLACKWELL_TOL",
    "BlackwellVerdict",
    "PidDecomposition",
    "blackwell_check",
    "decompose",
    "redundancy_lower_bound",
]
