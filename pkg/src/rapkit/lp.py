"""Linear relaxation of the robust assignment formulation, plus a solver.

The model has one y variable per edge and, for every vulnerable edge f, a
block of x variables describing a fractional perfect matching that avoids f.
On bipartite graphs the degree equalities alone carve out the perfect
matching polytope, so each block contributes one equality per node and one
coupling inequality x <= y per edge. Minimizing c*y over these constraints
lower-bounds every robust solution.

Solving goes through a small solver contract so an external LP engine could
be swapped in; the built-in engine is a bounded-variable revised primal
simplex on a dense basis inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol

import numpy as np

from rapkit.instance import (
    NOMINAL_SCENARIO,
    InstanceError,
    RapInstance,
    check_feasible,
)

EPS_FEAS = 1e-9
EPS_OPT = 1e-7


class LpError(RuntimeError):
    """The solver failed: infeasible model, iteration limit, or numerics."""


@dataclass(frozen=True)
class RapLp:
    """The relaxation in matrix form with deterministic variable order.

    Columns: the y block first (by edge id), then one x block per vulnerable
    edge in ascending id order. With no vulnerable edges a single nominal
    x block (key ``NOMINAL_SCENARIO``) keeps the model non-vacuous, so the
    optimum is the cheapest perfect matching. Rows: per-block degree
    equalities (R nodes then T nodes), then per-block coupling rows
    x_e - y_e <= 0. The fixing x^{-f}_f = 0 is a variable bound, not a row.
    """

    instance: RapInstance
    blocks: tuple[int, ...]
    a_matrix: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    var_names: tuple[str, ...]
    row_names: tuple[str, ...]

    @property
    def n_vars(self) -> int:
        return self.a_matrix.shape[1]

    @property
    def n_rows(self) -> int:
        return self.a_matrix.shape[0]

    def y_index(self, e: int) -> int:
        return e

    def x_index(self, block_pos: int, e: int) -> int:
        return (block_pos + 1) * self.instance.graph.n_edges + e


@dataclass(frozen=True)
class FractionalSolution:
    """Optimal point of the relaxation: y per edge, x per scenario block."""

    y: tuple[float, ...]
    x: Mapping[int, tuple[float, ...]]
    objective: float
    iterations: int


def build_lp(inst: RapInstance) -> RapLp:
    if not inst.graph.balanced:
        raise InstanceError("apply balanced_completion first")
    if not check_feasible(inst):
        raise InstanceError("infeasible instance")
    g = inst.graph
    m = g.n_edges
    blocks = tuple(sorted(inst.vulnerable)) if inst.vulnerable else (NOMINAL_SCENARIO,)
    k = len(blocks)
    n_vars = m * (k + 1)
    n_deg = k * (g.n_r + g.n_t)
    n_rows = n_deg + k * m

    a = np.zeros((n_rows, n_vars))
    rhs = np.zeros(n_rows)
    senses: list[str] = []
    row_names: list[str] = []

    def block_tag(f: int) -> str:
        return "nom" if f == NOMINAL_SCENARIO else f"f{f}"

    row = 0
    for pos, f in enumerate(blocks):
        base = (pos + 1) * m
        for r in range(g.n_r):
            for e in g.adj_r[r]:
                a[row, base + e] += 1.0
            rhs[row] = 1.0
            senses.append("E")
            row_names.append(f"deg_{block_tag(f)}_r{r}")
            row += 1
        for t in range(g.n_t):
            for e in g.adj_t[t]:
                a[row, base + e] += 1.0
            rhs[row] = 1.0
            senses.append("E")
            row_names.append(f"deg_{block_tag(f)}_t{t}")
            row += 1
    for pos, f in enumerate(blocks):
        base = (pos + 1) * m
        for e in range(m):
            a[row, base + e] = 1.0
            a[row, e] = -1.0
            rhs[row] = 0.0
            senses.append("L")
            row_names.append(f"cpl_{block_tag(f)}_e{e}")
            row += 1

    lower = np.zeros(n_vars)
    upper = np.ones(n_vars)
    for pos, f in enumerate(blocks):
        if f != NOMINAL_SCENARIO:
            upper[(pos + 1) * m + f] = 0.0

    objective = np.zeros(n_vars)
    objective[:m] = np.asarray(inst.costs, dtype=float)

    var_names = [f"y_{e}" for e in range(m)]
    for f in blocks:
        var_names += [f"x_{block_tag(f)}_e{e}" for e in range(m)]

    return RapLp(
        instance=inst,
        blocks=blocks,
        a_matrix=a,
        senses=tuple(senses),
        rhs=rhs,
        lower=lower,
        upper=upper,
        objective=objective,
        var_names=tuple(var_names),
        row_names=tuple(row_names),
    )


class LpSolver(Protocol):
    """Contract for pluggable LP engines."""

    def solve(self, lp: RapLp, tol: float) -> tuple[np.ndarray, float, int]:
        """Return (variable values, objective, iteration count)."""
        ...


_AT_LB, _AT_UB, _BASIC = 0, 1, 2


class SimplexSolver:
    """Two-phase bounded-variable revised primal simplex.

    Dense basis inverse with product-form pivot updates and periodic
    refactorization. Pricing is Dantzig's rule with first-index tie breaks;
    after a run of degenerate pivots it falls back to Bland's rule until a
    positive step is taken, which guarantees termination.
    """

    def __init__(
        self,
        pivot_tol: float = 1e-9,
        refactor_every: int = 100,
        degenerate_switch: int = 50,
    ):
        self.pivot_tol = pivot_tol
        self.refactor_every = refactor_every
        self.degenerate_switch = degenerate_switch

    def solve(self, lp: RapLp, tol: float) -> tuple[np.ndarray, float, int]:
        n_rows, n_struct = lp.a_matrix.shape
        if n_rows == 0:
            values = lp.lower.copy()
            return values, float(lp.objective @ values), 0

        l_rows = [i for i, s in enumerate(lp.senses) if s == "L"]
        e_rows = [i for i, s in enumerate(lp.senses) if s == "E"]
        n_slack, n_art = len(l_rows), len(e_rows)
        n_cols = n_struct + n_slack + n_art

        a = np.zeros((n_rows, n_cols))
        a[:, :n_struct] = lp.a_matrix
        for j, i in enumerate(l_rows):
            a[i, n_struct + j] = 1.0
        for j, i in enumerate(e_rows):
            a[i, n_struct + n_slack + j] = 1.0

        inf = np.inf
        lower = np.concatenate([lp.lower, np.zeros(n_slack + n_art)])
        upper = np.concatenate([lp.upper, np.full(n_slack, inf), np.full(n_art, inf)])

        # start: slacks and artificials basic, structurals at lower bound
        status = np.full(n_cols, _AT_LB, dtype=np.int8)
        basic = np.empty(n_rows, dtype=np.int64)
        for j, i in enumerate(l_rows):
            basic[i] = n_struct + j
        for j, i in enumerate(e_rows):
            basic[i] = n_struct + n_slack + j
        status[basic] = _BASIC

        state = _SimplexState(a, lp.rhs.copy(), lower, upper, basic, status, self)

        phase1_cost = np.zeros(n_cols)
        phase1_cost[n_struct + n_slack :] = 1.0
        state.run(phase1_cost)
        if state.objective(phase1_cost) > 1e-7:
            raise LpError("LP infeasible")

        # pin artificials at zero for the optimality phase
        state.upper[n_struct + n_slack :] = 0.0
        phase2_cost = np.zeros(n_cols)
        phase2_cost[:n_struct] = lp.objective
        state.run(phase2_cost)

        values = state.values()[:n_struct]
        return values, float(lp.objective @ values), state.iterations


class _SimplexState:
    def __init__(self, a, rhs, lower, upper, basic, status, cfg: SimplexSolver):
        self.a = a
        self.rhs = rhs
        self.lower = lower
        self.upper = upper
        self.basic = basic
        self.status = status
        self.cfg = cfg
        self.n_rows, self.n_cols = a.shape
        self.b_inv = np.eye(self.n_rows)
        self.iterations = 0
        self._since_refactor = 0
        self.x_b = self._recompute_basics()

    def _nonbasic_values(self) -> np.ndarray:
        vals = np.where(self.status == _AT_UB, self.upper, self.lower)
        vals[self.status == _BASIC] = 0.0
        return vals

    def _recompute_basics(self) -> np.ndarray:
        vals = self._nonbasic_values()
        return self.b_inv @ (self.rhs - self.a @ vals)

    def _refactorize(self) -> None:
        b = self.a[:, self.basic]
        try:
            self.b_inv = np.linalg.inv(b)
        except np.linalg.LinAlgError as exc:
            raise LpError("singular basis") from exc
        self.x_b = self._recompute_basics()
        self._since_refactor = 0

    def values(self) -> np.ndarray:
        vals = self._nonbasic_values()
        vals[self.basic] = self.x_b
        return vals

    def objective(self, cost: np.ndarray) -> float:
        return float(cost @ self.values())

    def run(self, cost: np.ndarray) -> None:
        max_iter = 200 + 100 * (self.n_rows + self.n_cols)
        piv_tol = self.cfg.pivot_tol
        degenerate_run = 0
        bland = False
        fixed = self.upper - self.lower <= 0

        for _ in range(max_iter):
            self.iterations += 1
            y_dual = cost[self.basic] @ self.b_inv
            reduced = cost - y_dual @ self.a

            viol = np.where(
                self.status == _AT_LB,
                -reduced,
                np.where(self.status == _AT_UB, reduced, -np.inf),
            )
            viol[self.status == _BASIC] = -np.inf
            viol[fixed] = -np.inf

            if bland:
                candidates = np.flatnonzero(viol > EPS_OPT)
                if candidates.size == 0:
                    self._refactorize()
                    return
                j = int(candidates[0])
            else:
                j = int(np.argmax(viol))
                if viol[j] <= EPS_OPT:
                    self._refactorize()
                    return

            d = self.b_inv @ self.a[:, j]
            sigma = 1.0 if self.status[j] == _AT_LB else -1.0
            dd = sigma * d

            # ratio test: how far can the entering variable move before a
            # basic variable hits one of its bounds
            cols = self.basic
            t_rows = np.full(self.n_rows, np.inf)
            pos = dd > piv_tol
            t_rows[pos] = (self.x_b[pos] - self.lower[cols[pos]]) / dd[pos]
            neg = (dd < -piv_tol) & (self.upper[cols] != np.inf)
            t_rows[neg] = (self.x_b[neg] - self.upper[cols[neg]]) / dd[neg]
            np.maximum(t_rows, 0.0, out=t_rows)

            t_bound = self.upper[j] - self.lower[j]
            t_min = float(t_rows.min()) if self.n_rows else np.inf
            if t_min < t_bound - 1e-12:
                # leaving-variable ties break toward the smallest column id
                cand = np.flatnonzero(t_rows <= t_min + 1e-12)
                leave_row = int(cand[np.argmin(cols[cand])])
                hit_lower = bool(dd[leave_row] > 0)
                t_best = float(t_rows[leave_row])
            else:
                leave_row = -1
                hit_lower = True
                t_best = t_bound

            if t_best == np.inf:
                raise LpError("LP unbounded")

            step = max(t_best, 0.0)
            if step <= 1e-12:
                degenerate_run += 1
                if degenerate_run >= self.cfg.degenerate_switch:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

            if leave_row < 0:
                # bound flip: the entering variable crosses to its other bound
                self.x_b -= step * dd
                self.status[j] = _AT_UB if self.status[j] == _AT_LB else _AT_LB
                continue

            entering_value = (
                self.lower[j] + step if sigma > 0 else self.upper[j] - step
            )
            leaving = self.basic[leave_row]
            self.x_b -= step * dd
            self.x_b[leave_row] = entering_value
            self.status[leaving] = _AT_LB if hit_lower else _AT_UB
            self.status[j] = _BASIC
            self.basic[leave_row] = j

            pivot = d[leave_row]
            if abs(pivot) < piv_tol:
                raise LpError("numerically singular pivot")
            self.b_inv[leave_row, :] /= pivot
            others = np.arange(self.n_rows) != leave_row
            self.b_inv[others, :] -= np.outer(d[others], self.b_inv[leave_row, :])

            self._since_refactor += 1
            if self._since_refactor >= self.cfg.refactor_every:
                self._refactorize()

        raise LpError("iteration limit")


def solve_lp(
    lp: RapLp, tol: float = EPS_FEAS, solver: LpSolver | None = None
) -> FractionalSolution:
    """Solve the relaxation to optimality and validate the returned point.

    The point is checked against every row and bound with residual at most
    ``tol``; a violation means the engine misbehaved and raises ``LpError``.
    """
    engine = solver if solver is not None else SimplexSolver()
    values, objective, iters = engine.solve(lp, tol)

    residual = lp.a_matrix @ values - lp.rhs
    for i, sense in enumerate(lp.senses):
        bad = abs(residual[i]) > tol if sense == "E" else residual[i] > tol
        if bad:
            raise LpError(f"residual {residual[i]:.2e} on row {lp.row_names[i]}")
    if np.any(values < lp.lower - tol) or np.any(values > lp.upper + tol):
        raise LpError("variable bound violated")

    m = lp.instance.graph.n_edges
    y = tuple(float(v) for v in values[:m])
    x: dict[int, tuple[float, ...]] = {}
    for pos, f in enumerate(lp.blocks):
        base = (pos + 1) * m
        x[f] = tuple(float(v) for v in values[base : base + m])
    return FractionalSolution(y=y, x=x, objective=objective, iterations=iters)


def dump_lp(lp: RapLp) -> str:
    """Render the model in the common textual LP interchange format."""

    def term(coef: float, name: str, first: bool) -> str:
        sign = "- " if coef < 0 else ("" if first else "+ ")
        mag = abs(coef)
        coef_s = "" if mag == 1.0 else f"{mag:g} "
        return f"{sign}{coef_s}{name}"

    lines = ["Minimize"]
    obj_terms = []
    first = True
    for j, cval in enumerate(lp.objective):
        if cval == 0.0:
            continue
        obj_terms.append(term(float(cval), lp.var_names[j], first))
        first = False
    lines.append(" obj: " + (" ".join(obj_terms) or "0"))
    lines.append("Subject To")
    for i in range(lp.n_rows):
        row = lp.a_matrix[i]
        terms = []
        first = True
        for j in np.flatnonzero(row):
            terms.append(term(float(row[j]), lp.var_names[j], first))
            first = False
        op = "=" if lp.senses[i] == "E" else "<="
        lines.append(f" {lp.row_names[i]}: {' '.join(terms)} {op} {lp.rhs[i]:g}")
    lines.append("Bounds")
    for j, name in enumerate(lp.var_names):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == hi:
            lines.append(f" {name} = {lo:g}")
        else:
            lines.append(f" {lo:g} <= {name} <= {hi:g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
