"""Second-order linearly implicit SAV integrating-factor stepper.

One step advances ``(u, v, r)`` by

    u+ = e11(tau) u + e12(tau) v - tau beta r_half e12(tau/2) f
    v+ = e21(tau) u + e22(tau) v - tau beta r_half e22(tau/2) f
    (r+ - r)/tau = Re(f, A(u, u+, v, v+))

with ``f = f_N(3u/2 - u_prev/2)`` (``f_N(u)`` on the first step) and
``A`` the half-step average below. Because ``u+``, ``v+`` are affine in
``r_half = (r + r+)/2`` the scalar equation is solved in closed form, so the
step needs no linear solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonFinite, SolveDegenerate
from .expop import ExpTable
from .sav_core import ProblemParams, SavState, f_N_array
from .spectral import Field, Repr, forward_array, inverse_array, parseval_factor

#: |4 - 2 tau b2| below this is treated as a breakdown of the scalar solve.
DEGENERACY_TOL = 1e-10

ELEMENT_TIMES = (
    ("11", 1.0), ("12", 1.0), ("21", 1.0), ("22", 1.0),
    ("12", 0.5), ("22", 0.5), ("21", 0.5), ("21", -0.5), ("22", -0.5),
)


@dataclass
class SavIfWorkspace:
    tau: float
    table: ExpTable
    u_prev: Optional[Field] = None
    first_step_done: bool = False
    steps_taken: int = 0
    last_used_extrapolation: bool = False
    last_denominator: float = float("nan")
    min_abs_denominator: float = float("inf")
    elems: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        for kind, frac in ELEMENT_TIMES:
            self.elems[(kind, frac)] = self.table.eig(kind, frac * self.tau)

    def e(self, kind: str, frac: float) -> np.ndarray:
        return self.elems[(kind, frac)]


def make_workspace(params: ProblemParams, tau: float, table: Optional[ExpTable] = None) -> SavIfWorkspace:
    if table is None:
        table = ExpTable(params.grid, params.alpha)
    elif table.grid != params.grid or table.alpha != params.alpha:
        raise ValueError("exp table was built for a different grid or alpha")
    return SavIfWorkspace(float(tau), table)


def extrapolate(u_n: Field, u_nm1: Field) -> Field:
    return 1.5 * u_n - 0.5 * u_nm1


def _half_average(ws: SavIfWorkspace, u_n, u_np1, v_n, v_np1):
    # spectral arrays in, spectral array out
    return 0.5 * (
        ws.e("21", 0.5) * u_n + ws.e("21", -0.5) * u_np1
        + ws.e("22", 0.5) * v_n + ws.e("22", -0.5) * v_np1
    )


def operator_A(u_n: Field, u_np1: Field, v_n: Field, v_np1: Field, ws: SavIfWorkspace) -> Field:
    """Half-step average ``(e21(t/2)u + e21(-t/2)u+ + e22(t/2)v + e22(-t/2)v+)/2``.

    The result is physical unless ``u_n`` is spectral.
    """
    out = _half_average(ws, *(f.to_spectral().data for f in (u_n, u_np1, v_n, v_np1)))
    res = Field(u_n.grid, out, Repr.SPECTRAL)
    return res if u_n.is_spectral else res.to_physical()


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFinite("non-finite values in stepper output; tau is probably too large")


@dataclass(frozen=True)
class StepCoefficients:
    """Intermediate quantities of one step, all sine-space arrays except the scalars."""

    u1: np.ndarray
    v1: np.ndarray
    u2: np.ndarray
    v2: np.ndarray
    b1: float
    b2: float
    denominator: float
    extrapolated: bool


def step_coefficients(state: SavState, params: ProblemParams, ws: SavIfWorkspace) -> StepCoefficients:
    """Linear flow, increments and the scalars ``b1``, ``b2`` for the next step.

    Does not mutate ``ws``; ``denominator`` is ``4 - 2 tau b2``.
    """
    grid = params.grid
    tau, beta = ws.tau, params.beta
    u = state.u.to_physical().data
    uh = forward_array(u)
    vh = state.v.to_spectral().data

    extrapolated = ws.first_step_done and ws.u_prev is not None
    u_tilde = 1.5 * u - 0.5 * ws.u_prev.to_physical().data if extrapolated else u
    fh = forward_array(f_N_array(u_tilde, grid, params.C0))

    u1 = ws.e("11", 1.0) * uh + ws.e("12", 1.0) * vh
    v1 = ws.e("21", 1.0) * uh + ws.e("22", 1.0) * vh
    src = params.source_field(state.t + 0.5 * tau)
    if src is not None:
        sh = forward_array(src)
        u1 = u1 + tau * ws.e("12", 0.5) * sh
        v1 = v1 + tau * ws.e("22", 0.5) * sh
    u2 = -tau * beta * ws.e("12", 0.5) * fh
    v2 = -tau * beta * ws.e("22", 0.5) * fh

    scale = parseval_factor(grid)
    b1 = float(scale * np.vdot(_half_average(ws, uh, u1, vh, v1), fh).real)
    b2 = float(scale * np.vdot(_half_average(ws, 0.0, u2, 0.0, v2), fh).real)
    # (r+ - r)/tau = b1 + r_half b2 with r+ = 2 r_half - r
    return StepCoefficients(u1, v1, u2, v2, b1, b2, 4.0 - 2.0 * tau * b2, extrapolated)


def step(state: SavState, params: ProblemParams, ws: SavIfWorkspace) -> SavState:
    """Advance ``state`` by one step of size ``ws.tau``."""
    co = step_coefficients(state, params, ws)
    ws.last_used_extrapolation = co.extrapolated
    denom = co.denominator
    ws.last_denominator = denom
    ws.min_abs_denominator = min(ws.min_abs_denominator, abs(denom))
    if not abs(denom) >= DEGENERACY_TOL:
        raise SolveDegenerate(
            f"auxiliary-variable update is degenerate (|4 - 2 tau b2| = {abs(denom):.3e}); "
            "reduce the step size",
            denominator=denom,
            step=ws.steps_taken,
        )
    r_half = (4.0 * state.r + 2.0 * ws.tau * co.b1) / denom

    u_new = inverse_array(co.u1 + r_half * co.u2)
    v_new = inverse_array(co.v1 + r_half * co.v2)
    r_new = 2.0 * r_half - state.r
    _check_finite(u_new, v_new, np.array([r_new]))

    ws.u_prev = state.u.to_physical()
    ws.first_step_done = True
    ws.steps_taken += 1
    grid = params.grid
    return SavState(Field(grid, u_new), Field(grid, v_new), float(r_new), state.t + ws.tau)
