"""Scalar-auxiliary-variable state and the nonlinear functionals of the cubic NLSW.

The auxiliary variable tracks ``r = sqrt(H_N(u))`` with
``H_N(u) = (|u|^4 / 2, 1)_l2 + C0``; the schemes conserve the quadratic energy
``|u|_{N,1}^2 + ||v||_l2^2 + beta r^2 - beta C0``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import GridMismatch, NonFinite
from .spectral import Field, Grid2D, l2_sq, semi_h1_sq

SourceFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class ProblemParams:
    grid: Grid2D
    alpha: float = 1.0
    beta: float = 1.0
    C0: float = 1.0
    source: Optional[SourceFn] = None

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.beta == 0:
            raise ValueError("beta must be nonzero")
        if not self.C0 > 0:
            raise ValueError(f"C0 must be positive, got {self.C0}")

    def source_field(self, t: float) -> Optional[np.ndarray]:
        """Source sampled on the interior nodes at time ``t`` (None when unforced)."""
        if self.source is None:
            return None
        return self.grid.sample(self.source, t)


@dataclass(frozen=True)
class SavState:
    u: Field
    v: Field
    r: float
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise GridMismatch("u and v must share one grid")

    @property
    def grid(self) -> Grid2D:
        return self.u.grid


def g_fn(u: Field) -> Field:
    d = u.to_physical().data
    return Field(u.grid, (d.real**2 + d.imag**2) * d)


def _h_array(u: np.ndarray, grid: Grid2D, C0: float) -> float:
    a2 = u.real**2 + u.imag**2
    return float(grid.h1 * grid.h2 * 0.5 * np.sum(a2 * a2) + C0)


def H_N(u: Field, C0: float) -> float:
    return _h_array(u.to_physical().data, u.grid, C0)


def f_N_array(u: np.ndarray, grid: Grid2D, C0: float) -> np.ndarray:
    """Array version of :func:`f_N` for physical node values."""
    a2 = u.real**2 + u.imag**2
    h = float(grid.h1 * grid.h2 * 0.5 * np.sum(a2 * a2) + C0)
    return a2 * u / math.sqrt(h)


def f_N(u: Field, C0: float) -> Field:
    return Field(u.grid, f_N_array(u.to_physical().data, u.grid, C0))


def r_init(u0: Field, C0: float) -> float:
    return math.sqrt(H_N(u0, C0))


def discrete_energy(state: SavState, params: ProblemParams) -> float:
    return (
        semi_h1_sq(state.u)
        + l2_sq(state.v)
        + params.beta * state.r**2
        - params.beta * params.C0
    )


def init_state(params: ProblemParams, u0fn, u1fn) -> SavState:
    """Sample initial data ``u0fn(x, y)``, ``u1fn(x, y)`` at the interior nodes."""
    grid = params.grid
    u = grid.sample(u0fn)
    v = grid.sample(u1fn)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NonFinite("initial data has non-finite samples")
    uf = Field(grid, u)
    return SavState(uf, Field(grid, v), r_init(uf, params.C0), 0.0)


# -- checkpoints -------------------------------------------------------------

_MAGIC = "# savif-checkpoint v1"


def save_checkpoint(path, state: SavState, step: int = 0, u_prev: Optional[Field] = None,
                    meta: Optional[dict] = None) -> None:
    """Write ``(t, r, u, v)`` as CSV; floats use 17 significant digits (exact round trip).

    Rows are ``j,k,re_u,im_u,re_v,im_v`` with 1-based node indices. When the
    stepper needs the previous level (three-level scheme), ``re_uprev,im_uprev``
    columns are appended. ``meta`` is stored as one JSON comment line.
    """
    g = state.grid
    u = state.u.to_physical().data
    v = state.v.to_physical().data
    up = None if u_prev is None else u_prev.to_physical().data
    with open(path, "w", newline="") as fh:
        fh.write(_MAGIC + "\n")
        fh.write(f"# grid {g.xL!r} {g.yL!r} {g.X!r} {g.Y!r} {g.N}\n")
        fh.write(f"# state {state.t!r} {state.r!r} {int(step)}\n")
        fh.write("# meta " + json.dumps(meta or {}) + "\n")
        w = csv.writer(fh)
        header = ["j", "k", "re_u", "im_u", "re_v", "im_v"]
        if up is not None:
            header += ["re_uprev", "im_uprev"]
        w.writerow(header)
        for (j, k), uval in np.ndenumerate(u):
            vval = v[j, k]
            row = [j + 1, k + 1, f"{uval.real:.17g}", f"{uval.imag:.17g}",
                   f"{vval.real:.17g}", f"{vval.imag:.17g}"]
            if up is not None:
                row += [f"{up[j, k].real:.17g}", f"{up[j, k].imag:.17g}"]
            w.writerow(row)


@dataclass(frozen=True)
class Checkpoint:
    state: SavState
    step: int
    u_prev: Optional[Field]
    meta: dict


def load_checkpoint(path) -> Checkpoint:
    with open(path, newline="") as fh:
        magic = fh.readline().rstrip("\n")
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a savif checkpoint")
        gparts = fh.readline().split()[2:]
        grid = Grid2D(float(gparts[0]), float(gparts[1]), float(gparts[2]), float(gparts[3]), int(gparts[4]))
        sparts = fh.readline().split()[2:]
        t, r, step = float(sparts[0]), float(sparts[1]), int(sparts[2])
        meta = json.loads(fh.readline()[len("# meta "):])
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(x) for x in row] for row in reader])
    j = rows[:, 0].astype(int) - 1
    k = rows[:, 1].astype(int) - 1

    def column(re, im):
        out = np.zeros(grid.shape, dtype=complex)
        # assign parts separately so signed zeros survive
        out.real[j, k] = rows[:, header.index(re)]
        out.imag[j, k] = rows[:, header.index(im)]
        return out

    u = Field(grid, column("re_u", "im_u"))
    v = Field(grid, column("re_v", "im_v"))
    u_prev = Field(grid, column("re_uprev", "im_uprev")) if "re_uprev" in header else None
    return Checkpoint(SavState(u, v, r, t), step, u_prev, meta)


def with_time(state: SavState, t: float) -> SavState:
    return replace(state, t=t)
