"""High-order linearly implicit SAV integrating-factor Runge-Kutta steppers.

Stage values of ``u`` are first predicted by a fixed-point sweep on the
frozen cubic term; with ``f_i = f_N(u_pred_i)`` fixed, the stage equations are
linear and reduce to an ``s x s`` real system for the stage values of ``r``.
Any tableau with ``b_i a_ij + b_j a_ji = b_i b_j`` conserves the modified
energy exactly; the Gauss tableaus shipped here satisfy it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import NonFinite, SingularStageSystem
from .expop import ExpTable
from .sav_core import ProblemParams, SavState, f_N_array
from .spectral import Field, forward_array, inverse_array, parseval_factor

OVERFLOW_GUARD = 1e100
PIVOT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    name: str = ""

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        s = b.size
        if a.shape != (s, s) or c.size != s:
            raise ValueError(f"inconsistent tableau shapes a{a.shape}, b{b.shape}, c{c.shape}")
        for name, arr in (("a", a), ("b", b), ("c", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def s(self) -> int:
        return self.b.size

    def consistency_residual(self) -> float:
        """``max(|sum b - 1|, max_i |c_i - sum_j a_ij|)``."""
        return float(max(abs(self.b.sum() - 1.0), np.abs(self.c - self.a.sum(axis=1)).max()))


def check_conservation_condition(tableau: ButcherTableau) -> float:
    """Largest violation of ``b_i a_ij + b_j a_ji = b_i b_j``."""
    ba = tableau.b[:, None] * tableau.a
    return float(np.abs(ba + ba.T - np.outer(tableau.b, tableau.b)).max())


def gauss_tableau(s: int) -> ButcherTableau:
    if s == 2:
        r3 = np.sqrt(3.0)
        a = [[1 / 4, 1 / 4 - r3 / 6],
             [1 / 4 + r3 / 6, 1 / 4]]
        return ButcherTableau(a, [1 / 2, 1 / 2], [1 / 2 - r3 / 6, 1 / 2 + r3 / 6], 4, "gauss4")
    if s == 3:
        r15 = np.sqrt(15.0)
        a = [[5 / 36, 2 / 9 - r15 / 15, 5 / 36 - r15 / 30],
             [5 / 36 + r15 / 24, 2 / 9, 5 / 36 - r15 / 24],
             [5 / 36 + r15 / 30, 2 / 9 + r15 / 15, 5 / 36]]
        return ButcherTableau(a, [5 / 18, 4 / 9, 5 / 18], [1 / 2 - r15 / 10, 1 / 2, 1 / 2 + r15 / 10], 6, "gauss6")
    raise ValueError(f"built-in Gauss tableaus exist for s in (2, 3), got {s}")


def explicit_euler_tableau() -> ButcherTableau:
    """Violates the conservation condition; used as a negative control."""
    return ButcherTableau([[0.0]], [1.0], [0.0], 1, "explicit_euler")


@dataclass
class IfrkWorkspace:
    tau: float
    tableau: ButcherTableau
    table: ExpTable
    tol: float = 1e-13
    max_iter: Optional[int] = None
    # predictor sweep without beta on the cubic term (equivalent for beta = 1)
    strict_paper: bool = False
    last_iterations: int = 0
    last_stages: dict = field(default_factory=dict)
    steps_taken: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter is None:
            self.max_iter = self.tableau.order + 2
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        tab, tau, T = self.tableau, self.tau, self.table
        c, s = tab.c, tab.s
        self.e_c = {k: [T.eig(k, ci * tau) for ci in c] for k in ("11", "12", "21", "22")}
        self.e_diff = {k: [[T.eig(k, (c[i] - c[j]) * tau) for j in range(s)] for i in range(s)]
                       for k in ("12", "22")}
        self.e_rest = {k: [T.eig(k, (1.0 - ci) * tau) for ci in c] for k in ("12", "22")}
        self.e_full = {k: T.eig(k, tau) for k in ("11", "12", "21", "22")}


def make_workspace(params: ProblemParams, tau: float, tableau: ButcherTableau,
                   table: Optional[ExpTable] = None, **kwargs) -> IfrkWorkspace:
    if table is None:
        table = ExpTable(params.grid, params.alpha)
    return IfrkWorkspace(float(tau), tableau, table, **kwargs)


def _stage_sum(ws, kind, coeffs, vecs):
    # out_i = sum_j coeffs[i, j] e_kind((c_i - c_j) tau) vecs_j
    s = ws.tableau.s
    out = []
    for i in range(s):
        acc = np.zeros_like(vecs[0])
        for j in range(s):
            if coeffs[i, j] != 0.0:
                acc = acc + coeffs[i, j] * ws.e_diff[kind][i][j] * vecs[j]
        out.append(acc)
    return out


def _source_stages(params, ws, t_n):
    if params.source is None:
        return None
    return [forward_array(params.source_field(t_n + ci * ws.tau)) for ci in ws.tableau.c]


def _linear_stages(uh, vh, ws, src_h):
    """Stage values of the forced linear flow (no cubic term)."""
    tau, a, s = ws.tau, ws.tableau.a, ws.tableau.s
    u_lin = [ws.e_c["11"][i] * uh + ws.e_c["12"][i] * vh for i in range(s)]
    v_lin = [ws.e_c["21"][i] * uh + ws.e_c["22"][i] * vh for i in range(s)]
    if src_h is not None:
        su = _stage_sum(ws, "12", a, src_h)
        sv = _stage_sum(ws, "22", a, src_h)
        u_lin = [u_lin[i] + tau * su[i] for i in range(s)]
        v_lin = [v_lin[i] + tau * sv[i] for i in range(s)]
    return u_lin, v_lin


def predict_stages(u_n: Field, v_n: Field, params: ProblemParams, ws: IfrkWorkspace,
                   beta: Optional[float] = None, t_n: float = 0.0) -> list[Field]:
    """Fixed-point prediction of ``u(t_n + c_i tau)``; returns physical stage fields.

    ``beta`` overrides ``params.beta`` (``beta=0`` switches the cubic term off).
    """
    uh = u_n.to_spectral().data
    vh = v_n.to_spectral().data
    u_lin, _ = _linear_stages(uh, vh, ws, _source_stages(params, ws, t_n))
    preds = _predict(u_n.to_physical().data, u_lin, params, ws, beta)
    return [Field(u_n.grid, p) for p in preds]


def _predict(u_phys, u_lin_h, params, ws, beta=None):
    if beta is None:
        beta = 1.0 if ws.strict_paper else params.beta
    tau, a, s = ws.tau, ws.tableau.a, ws.tableau.s
    u_lin = [inverse_array(x) for x in u_lin_h]
    current = [u_phys] * s
    ws.last_iterations = 0
    for m in range(ws.max_iter):
        if beta != 0.0:
            gh = []
            for x in current:
                with np.errstate(over="ignore", invalid="ignore"):
                    gh.append(forward_array((x.real**2 + x.imag**2) * x))
            corr = _stage_sum(ws, "12", a, gh)
            new = [u_lin[i] - tau * beta * inverse_array(corr[i]) for i in range(s)]
        else:
            new = list(u_lin)
        with np.errstate(over="ignore", invalid="ignore"):
            change = max(np.abs(new[i] - current[i]).max() for i in range(s))
        current = new
        ws.last_iterations = m + 1
        if not (np.isfinite(change) and max(np.abs(x).max() for x in current) < OVERFLOW_GUARD):
            raise NonFinite("stage predictor diverged; tau is probably too large")
        if change < ws.tol:
            break
    return current


def solve_stage_r(v_lin_h, f_h, r_n: float, params: ProblemParams, ws: IfrkWorkspace) -> np.ndarray:
    """Solve the linear stage system for the auxiliary variable.

    ``v_lin_h`` are the stage velocities of the (forced) linear flow and ``f_h``
    the frozen ``f_N`` stage values, all in sine space.
    """
    tau, a, s, beta = ws.tau, ws.tableau.a, ws.tableau.s, params.beta
    scale = parseval_factor(params.grid)
    P = np.array([scale * np.vdot(v_lin_h[j], f_h[j]).real for j in range(s)])
    Q = np.empty((s, s))
    for j in range(s):
        for k in range(s):
            Q[j, k] = scale * np.vdot(ws.e_diff["22"][j][k] * f_h[k], f_h[j]).real
    M = np.eye(s) + tau * tau * beta * (a @ (a * Q))
    rhs = r_n + tau * (a @ P)
    with warnings.catch_warnings():
        # the pivot check below reports singular systems itself
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    if np.abs(np.diag(lu)).min() < PIVOT_TOL * max(np.abs(M).max(), 1.0):
        raise SingularStageSystem("stage system for r is singular; tau is probably too large")
    return scipy.linalg.lu_solve((lu, piv), rhs)


def step_ifrk(state: SavState, params: ProblemParams, ws: IfrkWorkspace) -> SavState:
    grid = params.grid
    tau, beta = ws.tau, params.beta
    tab = ws.tableau
    a, b, s = tab.a, tab.b, tab.s
    uh = state.u.to_spectral().data
    vh = state.v.to_spectral().data
    src_h = _source_stages(params, ws, state.t)

    u_lin, v_lin = _linear_stages(uh, vh, ws, src_h)
    preds = _predict(state.u.to_physical().data, u_lin, params, ws)
    f_h = [forward_array(f_N_array(p, grid, params.C0)) for p in preds]
    r_st = solve_stage_r(v_lin, f_h, state.r, params, ws)

    rf = [r_st[j] * f_h[j] for j in range(s)]
    du = _stage_sum(ws, "12", a, rf)
    dv = _stage_sum(ws, "22", a, rf)
    u_st = [u_lin[i] - tau * beta * du[i] for i in range(s)]
    v_st = [v_lin[i] - tau * beta * dv[i] for i in range(s)]

    scale = parseval_factor(grid)
    e = ws.e_full
    u_new = e["11"] * uh + e["12"] * vh
    v_new = e["21"] * uh + e["22"] * vh
    r_new = state.r
    for i in range(s):
        u_new = u_new - tau * beta * b[i] * ws.e_rest["12"][i] * rf[i]
        v_new = v_new - tau * beta * b[i] * ws.e_rest["22"][i] * rf[i]
        r_new = r_new + tau * b[i] * scale * np.vdot(v_st[i], f_h[i]).real
        if src_h is not None:
            u_new = u_new + tau * b[i] * ws.e_rest["12"][i] * src_h[i]
            v_new = v_new + tau * b[i] * ws.e_rest["22"][i] * src_h[i]

    u_new = inverse_array(u_new)
    v_new = inverse_array(v_new)
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new)) and np.isfinite(r_new)):
        raise NonFinite("non-finite values in stepper output; tau is probably too large")
    ws.last_stages = {"r": r_st, "f_hat": f_h, "u_hat": u_st, "v_hat": v_st,
                      "u_pred": preds, "u_lin_hat": u_lin, "v_lin_hat": v_lin}
    ws.steps_taken += 1
    return SavState(Field(grid, u_new), Field(grid, v_new), float(r_new), state.t + tau)
