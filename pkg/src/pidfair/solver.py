"""Unique information as a convex program over the fixed-marginal polytope.

``Uni(Z:A|B) = min_Q I_Q(Z;A|B)`` over joint distributions ``Q`` that keep
``P(Z,A)`` and ``P(Z,B)``. On that polytope ``H_Q(Z|B)`` is constant, so the
objective equals ``H(Z|B) + Phi(Q)`` with ``Phi(Q) = sum Q log Q(z|a,b)``, a
convex function whose gradient is ``log Q(z|a,b)``.

The minimization is conditional gradient (Frank-Wolfe) over the product of
per-target transportation polytopes, started at the conditionally independent
coupling ``Q0(z,a,b) = P(z,a) P(z,b) / P(z)``. Each iteration takes the
steepest of a joint Frank-Wolfe step, a joint pairwise step and a single-slice
pairwise step, followed by a Newton step restricted to the face the iterate
currently occupies. Every step uses an exact line search, so the objective
sequence is non-increasing.

First-order steps crawl when the optimum sits on a low-dimensional face
(whole ``(a, b)`` columns empty). When the certificate stops improving, a
log-barrier method on the dual program (:mod:`pidfair.barrier`) runs once;
its primal point replaces the iterate only if it is better.

Suboptimality is certified by two lower bounds on the optimum:

* the Frank-Wolfe gap of a linear minorant of the objective's directional
  derivative;
* the Lagrangian dual ``sum lam P(z,a) + sum mu P(z,b) - max_ab logsumexp_z
  (lam + mu)``, at multipliers fitted to ``log Q(z|a,b)`` on the support or
  at the barrier's dual iterate, whichever is larger.

``certified_gap`` is the smaller of the two.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.special import logsumexp, xlogy

from .barrier import DualBarrier
from .dist import AXIS, JointDist, cmi_array
from .polytope import MarginalPolytope, Slice

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
# fraction of a full step withheld when the step would empty an (a, b) column
EMPTY_SHORTFALL = 1e-4
# columns lighter than this are left out of Newton steps
NEWTON_COLUMN_FLOOR = 1e-12
# iterations without halving the certificate before the dual barrier takes over
STALL_ITERS = 25


class UnsupportedShapeError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iters: int = 10_000
    boundary_eps: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")
        if not 0 < self.boundary_eps < 1e-6:
            raise ValueError("boundary_eps must lie in (0, 1e-6)")


@dataclass(frozen=True, eq=False)
class SolverResult:
    """Outcome of one unique-information solve; all values in bits.

    ``optimal_q`` has axes ``(target, A, B)``.
    """

    optimal_q: JointDist
    objective: float
    certified_gap: float
    iterations: int
    converged: bool
    fw_gap: float = math.inf
    dual_gap: float = math.inf
    trace: tuple[float, ...] = field(default=(), repr=False)


def q0_array(p_za: np.ndarray, p_zb: np.ndarray) -> np.ndarray:
    """``P(z,a) P(z,b) / P(z)``; slices with ``P(z) = 0`` are zero."""
    p_z = p_za.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(p_z > 0, 1.0 / p_z, 0.0)
    return p_za[:, :, None] * p_zb[:, None, :] * inv[:, None, None]


def construct_q0(dist: JointDist, target: str = "z") -> JointDist:
    """Coupling of the two non-target variables made independent given the target.

    The result keeps both pairwise marginals with the target, so it lies in
    the fixed-marginal polytope of ``dist``.
    """
    t = AXIS[target]
    p = np.moveaxis(dist.probs, t, 0)
    q0 = q0_array(p.sum(axis=2), p.sum(axis=1))
    q0 = np.moveaxis(q0, 0, t)
    return JointDist(dist.alphabets, q0 / q0.sum())


def _phi(q: np.ndarray) -> float:
    """``sum Q log Q(z|a,b)`` in nats."""
    col = q.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, q / col, 1.0)
    return float(np.sum(xlogy(q, ratio)))


class _Solver:
    def __init__(self, poly: MarginalPolytope, cfg: SolverConfig):
        self.poly = poly
        self.cfg = cfg
        self.slices: list[Slice] = poly.slices()
        self.q = q0_array(poly.p_za, poly.p_zb)
        _, na, nb = poly.shape
        support = np.zeros(poly.shape, dtype=bool)
        for s in self.slices:
            support[s.z][np.ix_(s.rows, s.cols)] = True
        self.support = support
        # number of target values that can reach each (a, b) column
        self.reach = support.sum(axis=0)
        # best dual lower bound on min Phi found so far, nats
        self.lower = -math.inf
        self.atoms: list[list[np.ndarray]] = []
        self.weights: list[list[float]] = []
        self.ids: list[list] = []
        self._reset_atoms()

    def _reset_atoms(self):
        """Restart every slice's active set from the current iterate."""
        self.atoms = [[self.q[s.z][np.ix_(s.rows, s.cols)].copy()] for s in self.slices]
        self.weights = [[1.0] for _ in self.slices]
        self.ids = [[None] for _ in self.slices]

    def objective(self) -> float:
        return max(cmi_array(self.q), 0.0)

    # -- linear models -------------------------------------------------------

    def _fit(self) -> tuple[np.ndarray, float]:
        """Additive model ``lam(z,a) + mu(z,b)`` fitted to ``log Q(z|a,b)``.

        Weighted least squares on occupied cells, one fit per target slice.
        Returns the model on the support (``-inf`` elsewhere) and the linear
        part of the dual objective, ``sum lam P(z,a) + sum mu P(z,b)``.
        """
        col = self.q.sum(axis=0)
        model = np.full(self.q.shape, -np.inf)
        linear = 0.0
        for s in self.slices:
            m, n = s.shape
            ix = np.ix_(s.rows, s.cols)
            qz = self.q[s.z][ix]
            pos = qz > 0
            ii, jj = np.nonzero(pos)
            target = np.log(qz[pos] / col[ix][pos])
            w = np.sqrt(qz[pos])
            X = np.zeros((len(ii), m + n))
            X[np.arange(len(ii)), ii] = 1.0
            X[np.arange(len(ii)), m + jj] = 1.0
            coef, *_ = np.linalg.lstsq(X * w[:, None], target * w, rcond=None)
            lam, mu = coef[:m], coef[m:]
            linear += float(lam @ s.row_sums + mu @ s.col_sums)
            model[s.z][ix] = lam[:, None] + mu[None, :]
        return model, linear

    def _linearization(self, model: np.ndarray) -> tuple[np.ndarray, bool]:
        """Linear model of ``Phi`` around the iterate and whether it is a minorant.

        Occupied columns carry the gradient ``log Q(z|a,b)``. On an empty
        column the directional derivative ``sum v log(v / sum v)`` is bounded
        below by ``sum v (c - logsumexp(c))`` for any ``c``; the fitted model
        supplies ``c``. Zero cells inside occupied columns have slope
        ``-inf``: they are clamped at ``boundary_eps`` and void the bound.
        """
        eps = self.cfg.boundary_eps
        col = self.q.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            # exact wherever the cell is positive: clamping a tiny positive
            # cell would overstate its slope and break the minorant
            grad = np.where(
                self.q > 0,
                np.log(self.q) - np.log(col)[None],
                np.log(eps) - np.log(np.maximum(col, eps))[None],
            )
            norm = logsumexp(model, axis=0)
            entering = np.where(np.isfinite(model), model - norm[None], 0.0)
        empty = col <= 0
        grad = np.where(empty[None], entering, grad)
        valid = not np.any((self.q <= 0) & ~empty[None] & self.support)
        return grad, valid

    def _dual_gap(self, model: np.ndarray, linear: float) -> float:
        """``Phi(Q)`` minus the best known dual bound, in nats."""
        reachable = self.reach > 0
        if not reachable.any():
            return 0.0
        worst = float(np.max(logsumexp(model, axis=0)[reachable]))
        return max(_phi(self.q) - max(linear - worst, self.lower), 0.0)

    # -- steps ---------------------------------------------------------------

    def _line_search(self, d: np.ndarray, gmax: float) -> float:
        """Exact minimizer of ``Phi(q + g d)`` over ``g`` in ``[0, gmax]``."""
        mask = d != 0
        if not mask.any() or gmax <= 0:
            return 0.0
        dcol_full = d.sum(axis=0)
        col_full = self.q.sum(axis=0)
        d_ = d[mask]
        q_ = self.q[mask]
        _, ia, ib = np.nonzero(mask)
        dc = dcol_full[ia, ib]
        c_ = col_full[ia, ib]
        cmask = dcol_full != 0
        dcol, col = dcol_full[cmask], col_full[cmask]

        def derivs(g):
            qc = np.maximum(q_ + g * d_, 0.0)
            cc = np.maximum(c_ + g * dc, 0.0)
            cab = np.maximum(col + g * dcol, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                # an emptying column keeps the limiting ratio d / d_col
                lim = np.where(dc != 0, d_ / np.where(dc != 0, dc, 1.0), 1.0)
                ratio = np.where(cc > 0, qc / np.where(cc > 0, cc, 1.0), lim)
                first = float(np.sum(d_ * np.log(ratio)))
                second = float(np.sum(d_ * d_ / qc) - np.sum(dcol * dcol / cab))
            return first, second

        top, _ = derivs(gmax)
        if not top > 0:
            # landing on an emptied column would leave a point where the
            # objective is not differentiable; stop just short of it
            if np.any((col > 0) & (col + gmax * dcol <= 0)):
                return gmax * (1.0 - EMPTY_SHORTFALL)
            return gmax
        lo, hi = 0.0, gmax
        g = 0.5 * gmax
        for _ in range(200):
            val, curv = derivs(g)
            if val > 0:
                hi = g
            else:
                lo = g
            if hi - lo <= 1e-16 * gmax or val == 0:
                break
            newton = g - val / curv if curv > 0 and np.isfinite(curv) else np.nan
            g = newton if lo < newton < hi else 0.5 * (lo + hi)
        return lo

    def _newton_direction(self) -> np.ndarray | None:
        """Newton direction for ``Phi`` on the current face.

        Free cells are the positive cells of columns heavier than
        ``NEWTON_COLUMN_FLOOR``; the direction keeps every marginal fixed.
        """
        q = self.q
        col = q.sum(axis=0)
        free = (q > 0) & (col[None] > NEWTON_COLUMN_FLOOR)
        iz, ia, ib = np.nonzero(free)
        n = len(iz)
        if n < 2:
            return None
        nz, na, nb = q.shape
        A = np.zeros((nz * (na + nb), n))
        A[iz * (na + nb) + ia, np.arange(n)] = 1.0
        A[iz * (na + nb) + na + ib, np.arange(n)] = 1.0
        A = A[A.any(axis=1)]
        N = null_space(A)
        if N.shape[1] == 0:
            return None
        qf = q[iz, ia, ib]
        cf = col[ia, ib]
        grad = np.log(qf / cf)
        # Hessian: diag(1/q) minus 1/C on every pair of cells sharing a column
        same_col = (ia[:, None] == ia[None, :]) & (ib[:, None] == ib[None, :])
        H = np.diag(1.0 / qf) - same_col / cf[:, None]
        Hr = N.T @ H @ N
        gr = N.T @ grad
        y, *_ = np.linalg.lstsq(Hr, -gr, rcond=1e-14)
        step = N @ y
        if not float(grad @ step) < 0:
            return None
        d = np.zeros_like(q)
        d[iz, ia, ib] = step
        return d

    def _newton_step(self) -> float:
        d = self._newton_direction()
        if d is None:
            return 0.0
        neg = d < 0
        gmax = float(np.min(-self.q[neg] / d[neg])) if neg.any() else 2.0
        g = self._line_search(d, min(gmax, 2.0))
        if g > 0:
            self.q = np.maximum(self.q + g * d, 0.0)
            self._reset_atoms()
        return g

    def _choose(self, picks, fw_gap, pw_total):
        """Steepest of: joint FW step, joint pairwise step, best single-slice pairwise step."""
        active = [k for k, p in enumerate(picks) if p[0] > 0]
        options = [(fw_gap, ("fw", list(range(len(picks)))))]
        if active:
            best_k = max(active, key=lambda k: picks[k][0])
            options.append((pw_total, ("pairwise", active)))
            options.append((picks[best_k][0], ("pairwise", [best_k])))
        gap, choice = max(options, key=lambda o: o[0])
        return choice if gap > 0 else None

    def _fw_step(self, picks, fw_gap, pw_total) -> float:
        choice = self._choose(picks, fw_gap, pw_total)
        if choice is None:
            return 0.0
        mode, blocks = choice
        d = np.zeros_like(self.q)
        for k in blocks:
            s = self.slices[k]
            _, vertex, _, away = picks[k]
            ix = np.ix_(s.rows, s.cols)
            start = self.q[s.z][ix] if mode == "fw" else self.atoms[k][away]
            d[s.z][ix] = vertex - start
        gmax = 1.0 if mode == "fw" else min(self.weights[k][picks[k][3]] for k in blocks)
        g = self._line_search(d, gmax)
        if g > 0:
            for k in blocks:
                _, vertex, vid, away = picks[k]
                self._update(k, vertex, vid, away if mode == "pairwise" else None, g)
        return g

    def _update(self, k: int, vertex: np.ndarray, vid: int, away, g: float):
        atoms, weights, ids = self.atoms[k], self.weights[k], self.ids[k]
        if away is None:
            weights[:] = [w * (1.0 - g) for w in weights]
        else:
            weights[away] -= g
        key = vid if vid >= 0 else tuple(np.round(vertex.ravel(), 15))
        if key in ids:
            weights[ids.index(key)] += g
        else:
            atoms.append(vertex.copy())
            weights.append(g)
            ids.append(key)
        keep = [i for i, w in enumerate(weights) if w > 1e-15]
        self.atoms[k] = [atoms[i] for i in keep]
        self.weights[k] = [weights[i] for i in keep]
        self.ids[k] = [ids[i] for i in keep]
        s = self.slices[k]
        total = sum(self.weights[k])
        qz = sum(w * a for w, a in zip(self.weights[k], self.atoms[k])) / total
        self.q[s.z][np.ix_(s.rows, s.cols)] = np.maximum(qz, 0.0)

    # -- driver ----------------------------------------------------------------

    def _barrier_fallback(self, budget: int) -> int:
        """Interior-point pass on the dual; keeps its bound and, if better, its point."""
        outcome = DualBarrier(self.slices, self.q.shape).solve(0.1 * self.cfg.tol * LN2, max_steps=budget)
        self.lower = max(self.lower, outcome.lower)
        if cmi_array(outcome.q) < cmi_array(self.q):
            self.q = outcome.q
            self._reset_atoms()
        return outcome.newton_steps

    def run(self) -> SolverResult:
        cfg = self.cfg
        trace = [self.objective()]
        fw_cert = dual_cert = certified = math.inf
        converged = False
        best, since_best, fallback_done = math.inf, 0, False
        it = 0
        while True:
            model, linear = self._fit()
            grad, valid = self._linearization(model)
            picks = []
            fw_gap = pw_total = 0.0
            for k, s in enumerate(self.slices):
                ix = np.ix_(s.rows, s.cols)
                gz = grad[s.z][ix]
                vertex, vid = s.minimize_linear(gz)
                scores = [float(np.sum(gz * a)) for a in self.atoms[k]]
                away = int(np.argmax(scores))
                v_score = float(np.sum(gz * vertex))
                fw_gap += float(np.sum(gz * self.q[s.z][ix])) - v_score
                pw = scores[away] - v_score
                pw_total += max(pw, 0.0)
                picks.append((pw, vertex, vid, away))
            fw_cert = max(fw_gap, 0.0) / LN2 if valid else math.inf
            dual_cert = self._dual_gap(model, linear) / LN2
            certified = min(fw_cert, dual_cert)
            if certified <= cfg.tol:
                converged = True
                break
            if it >= cfg.max_iters:
                break
            if certified < 0.5 * best:
                best, since_best = certified, 0
            else:
                since_best += 1
            moved = False
            if since_best < STALL_ITERS:
                moved = self._fw_step(picks, fw_gap, pw_total) > 0
                trace.append(self.objective())
                moved = self._newton_step() > 0 or moved
                trace.append(self.objective())
                it += 1
            if not moved:
                if fallback_done:
                    log.debug("no descent step available at iteration %d", it)
                    break
                log.debug("first-order phase stalled at iteration %d; switching to the dual barrier", it)
                it += self._barrier_fallback(cfg.max_iters - it)
                trace.append(self.objective())
                fallback_done, since_best = True, 0
        if not converged:
            log.info("unique-information solver stopped after %d iterations, gap %.3e", it, certified)
        poly = self.poly
        optimal = JointDist((poly.target, poly.source_a, poly.source_b), self.q / self.q.sum())
        return SolverResult(
            optimal_q=optimal,
            objective=self.objective(),
            certified_gap=certified,
            iterations=it,
            converged=converged,
            fw_gap=fw_cert,
            dual_gap=dual_cert,
            trace=tuple(trace),
        )


def unique_information(poly: MarginalPolytope, cfg: SolverConfig | None = None) -> SolverResult:
    """Minimize ``I_Q(Z;A|B)`` over the polytope.

    The returned objective is attained by ``optimal_q`` and is therefore an
    upper bound on the unique information; ``certified_gap`` bounds its
    distance from the true minimum. Running out of iterations is reported
    through ``converged=False`` rather than raised.
    """
    return _Solver(poly, cfg or SolverConfig()).run()


def brute_force_unique(poly: MarginalPolytope, grid_steps: int = 2001, chunk: int = 256) -> float:
    """Grid minimum of ``I_Q(Z;A|B)`` for all-binary alphabets.

    With binary alphabets each target slice is a 2x2 table with fixed margins
    and a single free cell ``t_z = Q(z, a0, b0)`` ranging over its Frechet
    interval. The grid covers both intervals end to end.
    """
    if poly.shape != (2, 2, 2):
        raise UnsupportedShapeError(f"grid oracle needs binary alphabets, got shape {poly.shape}")
    p_za, p_zb = poly.p_za, poly.p_zb
    p_z = p_za.sum(axis=1)
    grids = []
    for z in range(2):
        lo = max(0.0, p_za[z, 0] + p_zb[z, 0] - p_z[z])
        hi = min(p_za[z, 0], p_zb[z, 0])
        grids.append(np.linspace(lo, max(hi, lo), grid_steps))

    def cells(t, z):
        r0, c0 = p_za[z, 0], p_zb[z, 0]
        return (
            np.maximum(t, 0.0),
            np.maximum(r0 - t, 0.0),
            np.maximum(c0 - t, 0.0),
            np.maximum(p_z[z] - r0 - c0 + t, 0.0),
        )

    # terms fixed on the polytope: -sum P(z,b) log P(z,b) + sum P(b) log P(b)
    p_b = p_zb.sum(axis=0)
    const = -np.sum(xlogy(p_zb, p_zb)) + np.sum(xlogy(p_b, p_b))
    c1 = cells(grids[1][None, :], 1)
    best = np.inf
    for start in range(0, grid_steps, chunk):
        c0 = cells(grids[0][start:start + chunk, None], 0)
        # cells in order (a0,b0), (a0,b1), (a1,b0), (a1,b1)
        own = sum(xlogy(x, x) for x in c0) + sum(xlogy(x, x) for x in c1)
        cols = sum(xlogy(x + y, x + y) for x, y in zip(c0, c1))
        best = min(best, float(((own - cols + const) / LN2).min()))
    return max(best, 0.0)
