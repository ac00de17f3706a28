"""Manufactured-solution tests, convergence sweeps and energy-tracking runs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import stepper_ifrk, stepper_savif
from .expop import ExpTable
from .sav_core import H_N, ProblemParams, SavState, discrete_energy, init_state
from .spectral import Field, Grid2D, forward_array, inverse_array, l2_sq, make_grid, semi_h1_sq

SCHEMES = ("savif", "ifgrk4", "ifgrk6")
SCHEME_ORDER = {"savif": 2, "ifgrk4": 4, "ifgrk6": 6}

OMEGA = -math.sqrt(2.0) * math.pi


# -- initial data ------------------------------------------------------------

def example2_u0(x, y):
    return (1 + 1j) * (x + y) * np.exp(-10.0 * (1.0 - x - y) ** 2)


def zero_data(x, y):
    return np.zeros(np.broadcast(x, y).shape, dtype=complex)


def example1_grid(N: int) -> Grid2D:
    return make_grid(-8.0, -8.0, 16.0, 16.0, N)


def example2_grid(N: int) -> Grid2D:
    return make_grid(-32.0, -32.0, 64.0, 64.0, N)


# -- manufactured solution ---------------------------------------------------

def _sech(s):
    # exp(-s) / (1 + exp(-2s)) avoids overflow of cosh for large s >= 0
    e = np.exp(-s)
    return 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True)
class ManufacturedSolution:
    """``u = sech(x^2 + y^2) exp(i omega t)`` with ``omega = -sqrt(2) pi``.

    ``source`` is the residual ``u_tt + i alpha u_t - Lap u + beta |u|^2 u``, so
    the forced NLSW has ``u`` as its exact solution. ``include_derivatives=False``
    drops the ``u_tt``, ``u_t`` and Laplacian terms (test hook).
    """

    alpha: float = 1.0
    beta: float = 1.0
    include_derivatives: bool = True

    @staticmethod
    def phi(x, y):
        return _sech(x * x + y * y)

    @staticmethod
    def lap_phi(x, y):
        s = x * x + y * y
        sech = _sech(s)
        tanh = np.tanh(s)
        d1 = -sech * tanh
        d2 = sech * (tanh * tanh - sech * sech)
        return 4.0 * d1 + 4.0 * s * d2

    def u(self, x, y, t):
        return self.phi(x, y) * np.exp(1j * OMEGA * t)

    def u_t(self, x, y, t):
        return 1j * OMEGA * self.u(x, y, t)

    def u_tt(self, x, y, t):
        return -OMEGA**2 * self.u(x, y, t)

    def lap_u(self, x, y, t):
        return self.lap_phi(x, y) * np.exp(1j * OMEGA * t)

    def source(self, x, y, t):
        phi = self.phi(x, y)
        out = self.beta * phi**3
        if self.include_derivatives:
            out = out + (-OMEGA**2 - self.alpha * OMEGA) * phi - self.lap_phi(x, y)
        return out * np.exp(1j * OMEGA * t)

    def discrete_source(self, grid: Grid2D) -> Callable:
        """Source with the spectral Laplacian of the sampled profile.

        With this forcing the sampled exact solution solves the semi-discrete
        system exactly, so only time-discretization error remains.
        """
        phi = grid.sample(self.phi)
        lap_phi = inverse_array(-grid.lambda2 * forward_array(phi))
        profile = (-OMEGA**2 - self.alpha * OMEGA) * phi - lap_phi + self.beta * np.abs(phi) ** 2 * phi

        def src(x, y, t):
            return profile * np.exp(1j * OMEGA * t)

        return src


def manufactured_source(params_or_alpha, beta: Optional[float] = None) -> Callable:
    """Closed-form source ``S(x, y, t)`` for the manufactured solution."""
    if isinstance(params_or_alpha, ProblemParams):
        alpha, beta = params_or_alpha.alpha, params_or_alpha.beta
    else:
        alpha = params_or_alpha
    return ManufacturedSolution(alpha, beta).source


def manufactured_problem(N: int, beta: float = 1.0, alpha: float = 1.0, C0: float = 1.0,
                         source: str = "continuous") -> tuple[ProblemParams, ManufacturedSolution]:
    """Example 1 problem on ``(-8, 8)^2``; ``source`` is ``continuous``, ``discrete`` or ``none``."""
    grid = example1_grid(N)
    ms = ManufacturedSolution(alpha, beta)
    if source == "continuous":
        src = ms.source
    elif source == "discrete":
        src = ms.discrete_source(grid)
    elif source == "none":
        src = None
    else:
        raise ValueError(f"unknown source mode {source!r}")
    return ProblemParams(grid, alpha, beta, C0, src), ms


def manufactured_initial_state(params: ProblemParams, ms: ManufacturedSolution) -> SavState:
    return init_state(params, lambda x, y: ms.u(x, y, 0.0), lambda x, y: ms.u_t(x, y, 0.0))


# -- errors ------------------------------------------------------------------

@dataclass(frozen=True)
class StateError:
    h1_err: float
    l2_err_v: float
    r_err: float
    semi_h1_err: float


def h1_error(state: SavState, t: float, exact: ManufacturedSolution, C0: float = 1.0) -> StateError:
    grid = state.grid
    U = Field(grid, grid.sample(exact.u, t))
    V = Field(grid, grid.sample(exact.u_t, t))
    du = U - state.u.to_physical()
    dv = V - state.v.to_physical()
    semi = semi_h1_sq(du)
    return StateError(
        h1_err=math.sqrt(semi + l2_sq(du)),
        l2_err_v=math.sqrt(l2_sq(dv)),
        r_err=abs(math.sqrt(H_N(U, C0)) - state.r),
        semi_h1_err=math.sqrt(semi),
    )


# -- stepping ----------------------------------------------------------------

class Integrator:
    """Uniform front end over the second-order and Gauss steppers."""

    def __init__(self, scheme: str, params: ProblemParams, tau: float,
                 tol: float = 1e-13, max_iter: Optional[int] = None,
                 strict_paper: bool = False, tableau=None, table: Optional[ExpTable] = None):
        if scheme not in SCHEMES and tableau is None:
            raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        self.scheme = scheme
        self.params = params
        self.tau = float(tau)
        if table is None:
            table = ExpTable(params.grid, params.alpha)
        if scheme == "savif" and tableau is None:
            self.ws = stepper_savif.make_workspace(params, tau, table)
            self._step = stepper_savif.step
        else:
            if tableau is None:
                tableau = stepper_ifrk.gauss_tableau(2 if scheme == "ifgrk4" else 3)
            self.ws = stepper_ifrk.make_workspace(params, tau, tableau, table, tol=tol,
                                                  max_iter=max_iter, strict_paper=strict_paper)
            self._step = stepper_ifrk.step_ifrk

    def step(self, state: SavState) -> SavState:
        return self._step(state, self.params, self.ws)

    @property
    def min_abs_denominator(self) -> float:
        return getattr(self.ws, "min_abs_denominator", float("nan"))

    @property
    def last_iterations(self) -> int:
        return getattr(self.ws, "last_iterations", 0)

    def integrate(self, state: SavState, n_steps: int, callback=None, start_step: int = 0) -> SavState:
        """Take ``n_steps`` steps; ``callback(n, state)`` runs after each one."""
        for k in range(n_steps):
            state = self.step(state)
            if callback is not None:
                callback(start_step + k + 1, state)
        return state


def n_steps_for(T: float, tau: float) -> int:
    n = int(round(T / tau))
    if n < 1 or abs(n * tau - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"T={T} is not an integer multiple of tau={tau}")
    return n


def diagnostics_row(n: int, state: SavState, params: ProblemParams) -> tuple:
    """``(n, t, E, r, ||u||_inf)`` as passed to the CLI's per-step CSV writer."""
    return (n, state.t, discrete_energy(state, params), state.r,
            float(np.abs(state.u.to_physical().data).max()))


# -- sweeps ------------------------------------------------------------------

SWEEP_COLUMNS = ("param", "h1_err", "l2_err_v", "r_err", "energy_drift", "seconds")


def fit_slope(params: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(param)``."""
    x = np.log(np.asarray(params, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class SweepResult:
    control: str
    rows: list = field(default_factory=list)
    floor: float = 1e-12
    extra: dict = field(default_factory=dict)

    def sort(self):
        self.rows.sort(key=lambda r: r["param"])

    def usable(self):
        return [r for r in self.rows if r["h1_err"] > self.floor]

    @property
    def slope(self) -> Optional[float]:
        rows = self.usable()
        if len(rows) < 3:
            return None
        return fit_slope([r["param"] for r in rows], [r["h1_err"] for r in rows])

    def reduction_factors(self) -> list[float]:
        e = [r["h1_err"] for r in self.rows]
        return [e[i] / e[i + 1] for i in range(len(e) - 1)]

    def as_table(self) -> list[tuple]:
        return [tuple(r[c] for c in SWEEP_COLUMNS) for r in self.rows]


def _run_manufactured(scheme, params, ms, tau, T, **kw):
    state = manufactured_initial_state(params, ms)
    integ = Integrator(scheme, params, tau, **kw)
    E0 = discrete_energy(state, params)
    t0 = time.perf_counter()
    state = integ.integrate(state, n_steps_for(T, tau))
    elapsed = time.perf_counter() - t0
    err = h1_error(state, T, ms, params.C0)
    drift = abs(discrete_energy(state, params) - E0)
    return err, drift, elapsed, integ


def run_temporal_sweep(scheme: str, params: ProblemParams, ms: ManufacturedSolution,
                       tau_list: Sequence[float], T: float, **kw) -> SweepResult:
    res = SweepResult("tau")
    min_denom = float("inf")
    for tau in tau_list:
        err, drift, elapsed, integ = _run_manufactured(scheme, params, ms, tau, T, **kw)
        min_denom = min(min_denom, integ.min_abs_denominator)
        res.rows.append({"param": float(tau), "h1_err": err.h1_err, "l2_err_v": err.l2_err_v,
                         "r_err": err.r_err, "energy_drift": drift, "seconds": elapsed,
                         "semi_h1_err": err.semi_h1_err})
    res.sort()
    if scheme == "savif":
        res.extra["min_abs_denominator"] = min_denom
    return res


def run_spatial_sweep(scheme: str, N_list: Sequence[int], tau: float, T: float,
                      beta: float = 1.0, alpha: float = 1.0, C0: float = 1.0, **kw) -> SweepResult:
    res = SweepResult("N")
    for N in N_list:
        params, ms = manufactured_problem(N, beta=beta, alpha=alpha, C0=C0)
        err, drift, elapsed, _ = _run_manufactured(scheme, params, ms, tau, T, **kw)
        res.rows.append({"param": int(N), "h1_err": err.h1_err, "l2_err_v": err.l2_err_v,
                         "r_err": err.r_err, "energy_drift": drift, "seconds": elapsed,
                         "semi_h1_err": err.semi_h1_err})
    res.sort()
    return res


@dataclass
class EnergySeries:
    n: list
    t: list
    E: list
    RE: list
    final_state: Optional[SavState] = None
    min_abs_denominator: float = float("nan")

    @property
    def max_RE(self) -> float:
        return max(self.RE)


def run_energy_experiment(scheme: str, params: ProblemParams, tau: float, T: float,
                          state: Optional[SavState] = None, **kw) -> EnergySeries:
    """Track ``RE^n = |(E^n - E^0)/E^0|`` (Example 2 data unless ``state`` is given)."""
    if params.source is not None:
        raise ValueError("energy runs need an unforced problem")
    if state is None:
        state = init_state(params, example2_u0, zero_data)
    E0 = discrete_energy(state, params)
    out = EnergySeries([0], [state.t], [E0], [0.0])

    def record(n, st):
        E = discrete_energy(st, params)
        out.n.append(n)
        out.t.append(st.t)
        out.E.append(E)
        out.RE.append(abs((E - E0) / E0))

    integ = Integrator(scheme, params, tau, **kw)
    out.final_state = integ.integrate(state, n_steps_for(T, tau), record)
    out.min_abs_denominator = integ.min_abs_denominator
    return out
