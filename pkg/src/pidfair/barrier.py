"""Interior-point solution of the dual of the unique-information program.

The program ``min sum_ab f(Q_ab)`` with ``f(v) = sum_z v_z log(v_z / sum v)``
over tables with fixed ``P(z,a)`` and ``P(z,b)`` has the dual::

    max  sum lam(z,a) P(z,a) + sum mu(z,b) P(z,b)
    s.t. L_ab = logsumexp_z (lam(z,a) + mu(z,b)) <= 0   for every column (a, b)

whose constraints are smooth. A log barrier on ``-L_ab`` is minimized by
damped Newton steps for a decreasing sequence of barrier weights ``t``. On
the central path the primal point ``Q(z,a,b) = t / (-L_ab) * softmax_z(...)``
matches both marginals and the duality gap equals ``t`` times the number of
columns. Away from it, the primal point is made feasible slice by slice with
iterative proportional fitting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

# barrier weight is divided by this after each centering
T_FACTOR = 20.0
NEWTON_TOL = 1e-12
ARMIJO = 0.25


@dataclass
class BarrierOutcome:
    q: np.ndarray  # feasible primal table, axes (z, a, b)
    lower: float  # certified lower bound on the minimum of Phi, nats
    newton_steps: int
    ok: bool


def _ipf(table: np.ndarray, rows: np.ndarray, cols: np.ndarray, iters: int = 200) -> np.ndarray:
    """Scale a positive table to the given margins."""
    for _ in range(iters):
        table = table * (rows / table.sum(axis=1))[:, None]
        table = table * (cols / table.sum(axis=0))[None, :]
        if np.max(np.abs(table.sum(axis=1) - rows)) <= 1e-16 * max(rows.max(), 1e-300):
            break
    return table


class DualBarrier:
    """Log-barrier Newton method on the dual program for a list of slices."""

    def __init__(self, slices, shape):
        self.slices = slices
        self.shape = shape
        nz, na, nb = shape
        cells, lam_idx, mu_idx = [], [], []
        f = []
        nx = 0
        for s in slices:
            m, n = s.shape
            lam0 = nx
            nx += m
            f.extend(s.row_sums)
            # the last column multiplier of each slice is pinned at zero to
            # remove the shift lam + k, mu - k that leaves the dual unchanged
            mu0 = nx
            nx += n - 1
            f.extend(s.col_sums[:-1])
            for i, a in enumerate(s.rows):
                for j, b in enumerate(s.cols):
                    cells.append((s.z, a, b))
                    lam_idx.append(lam0 + i)
                    mu_idx.append(mu0 + j if j < n - 1 else -1)
        self.nx = nx
        self.f = np.array(f)
        self.cells = np.array(cells, dtype=int).reshape(-1, 3)
        ncell = len(cells)
        M = np.zeros((ncell, nx))
        M[np.arange(ncell), lam_idx] = 1.0
        mu_idx = np.array(mu_idx)
        has_mu = mu_idx >= 0
        M[np.arange(ncell)[has_mu], mu_idx[has_mu]] = 1.0
        self.M = M
        col_id = self.cells[:, 1] * nb + self.cells[:, 2]
        used, self.col_of = np.unique(col_id, return_inverse=True)
        self.ncol = len(used)
        # one-hot cell -> column matrix
        self.E = np.zeros((ncell, self.ncol))
        self.E[np.arange(ncell), self.col_of] = 1.0

    def _columns(self, x):
        c = self.M @ x
        big = np.full((self.ncol, self.shape[0]), -np.inf)
        big[self.col_of, self.cells[:, 0]] = c
        L = logsumexp(big, axis=1)
        sigma = np.exp(c - L[self.col_of])
        return c, L, sigma

    def _value(self, x, t):
        _, L, _ = self._columns(x)
        if np.any(L >= 0):
            return np.inf
        return -float(self.f @ x) - t * float(np.sum(np.log(-L)))

    def _derivatives(self, x, t):
        _, L, sigma = self._columns(x)
        w = t / -L
        wc = w[self.col_of]
        q = wc * sigma
        grad = -self.f + self.M.T @ q
        # per column: w (diag s - s s^T) + (w^2 / t) s s^T
        S = self.E * sigma[:, None]  # cell x column, sigma in its column
        H_cell = np.diag(q) + (S * (w * w / t - w)[None, :]) @ S.T
        H = self.M.T @ H_cell @ self.M
        return grad, H, q, L

    def primal(self, x, t):
        _, L, sigma = self._columns(x)
        return (t / -L)[self.col_of] * sigma

    def lower_bound(self, x) -> float:
        """Dual objective after shifting the multipliers onto the constraint boundary."""
        _, L, _ = self._columns(x)
        return float(self.f @ x) - float(L.max())

    def feasible_table(self, q_cells) -> np.ndarray:
        q = np.zeros(self.shape)
        q[tuple(self.cells.T)] = np.maximum(q_cells, 1e-300)
        for s in self.slices:
            ix = np.ix_(s.rows, s.cols)
            q[s.z][ix] = _ipf(q[s.z][ix], s.row_sums, s.col_sums)
        return q

    def solve(self, gap_target: float, max_steps: int = 500) -> BarrierOutcome:
        """Drive the barrier weight down until ``t * ncol <= gap_target``.

        ``gap_target`` is in nats. The returned bound is rigorous whatever the
        outcome; ``ok`` only reports whether the weight schedule completed.
        """
        nz = self.shape[0]
        # strictly feasible start: every logsumexp at most -1
        x = np.zeros(self.nx)
        x[self._lam_mask()] = -np.log(nz) - 1.0
        t = 1.0
        steps = 0
        ok = False
        while steps < max_steps:
            # centering
            for _ in range(100):
                grad, H, _, _ = self._derivatives(x, t)
                try:
                    dx = -np.linalg.solve(H, grad)
                except np.linalg.LinAlgError:
                    dx = -np.linalg.lstsq(H, grad, rcond=None)[0]
                decrement = float(-grad @ dx)
                steps += 1
                if decrement / 2 <= NEWTON_TOL * max(t, 1e-300) or steps >= max_steps:
                    break
                base = self._value(x, t)
                step = 1.0
                while step > 1e-12:
                    val = self._value(x + step * dx, t)
                    if val <= base - ARMIJO * step * decrement:
                        break
                    step *= 0.5
                if step <= 1e-12:
                    break
                x = x + step * dx
            if t * self.ncol <= gap_target:
                ok = True
                break
            t /= T_FACTOR
        q = self.feasible_table(self.primal(x, t))
        return BarrierOutcome(q=q, lower=self.lower_bound(x), newton_steps=steps, ok=ok)

    def _lam_mask(self):
        mask = np.zeros(self.nx, dtype=bool)
        pos = 0
        for s in self.slices:
            m, n = s.shape
            mask[pos:pos + m] = True
            pos += m + n - 1
        return mask
