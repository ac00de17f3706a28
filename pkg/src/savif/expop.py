"""Blocks of the matrix exponential ``exp(t A)`` for the linear NLSW operator.

With ``A = [[0, I], [Lap, -i alpha I]]`` every block is diagonal in the sine
basis. Per mode, with ``omega = -sqrt(alpha^2 + 4 lambda^2)`` and
``theta = omega t / 2``::

    e11 = exp(-i alpha t/2) (cos theta + i alpha/omega sin theta)
    e12 = exp(-i alpha t/2) 2 sin(theta) / omega
    e21 = -lambda^2 e12
    e22 = exp(-i alpha t/2) (cos theta - i alpha/omega sin theta)

which is the difference-of-exponentials form with the common phase factored
out, so small ``omega t`` does not lose digits.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch
from .spectral import Field, Grid2D, Repr, forward_array, inverse_array

KINDS = ("11", "12", "21", "22")


def omegas(alpha: float, lambda2):
    """Return ``(omega_plus, omega_minus, omega)`` for the given eigenvalue magnitudes."""
    root = np.sqrt(alpha * alpha + 4.0 * np.asarray(lambda2, dtype=float))
    wp = -(alpha + root) / 2.0
    wm = -(alpha - root) / 2.0
    return wp, wm, -root


def block_eigenvalues(alpha: float, lambda2, t: float, kind: str) -> np.ndarray:
    """Per-mode eigenvalue of block ``kind`` of ``exp(t A)``."""
    lambda2 = np.asarray(lambda2, dtype=float)
    _, _, w = omegas(alpha, lambda2)
    theta = 0.5 * w * t
    phase = np.exp(-0.5j * alpha * t)
    s, c = np.sin(theta), np.cos(theta)
    if kind == "11":
        return phase * (c + 1j * (alpha / w) * s)
    if kind == "22":
        return phase * (c - 1j * (alpha / w) * s)
    e12 = phase * (2.0 * s / w)
    if kind == "12":
        return e12
    if kind == "21":
        return -lambda2 * e12
    raise ValueError(f"unknown block {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True, eq=False)
class ExpElement:
    kind: str
    t: float
    eig: np.ndarray
    alpha: float
    grid: Grid2D


def build_element(grid: Grid2D, alpha: float, kind: str, t: float) -> ExpElement:
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    eig = block_eigenvalues(alpha, grid.lambda2, float(t), kind)
    eig.setflags(write=False)
    return ExpElement(kind, float(t), eig, float(alpha), grid)


def apply(elem: ExpElement, f: Field) -> Field:
    """Multiply ``f`` by the block in sine space; output keeps the input representation."""
    if f.grid != elem.grid:
        raise GridMismatch("element and field were built on different grids")
    if f.is_spectral:
        return Field(f.grid, elem.eig * f.data, Repr.SPECTRAL)
    return Field(f.grid, inverse_array(elem.eig * forward_array(f.data)), Repr.PHYSICAL)


@dataclass
class ExpTable:
    """Cache of blocks for one ``(grid, alpha)``, keyed by block and exact time."""

    grid: Grid2D
    alpha: float
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        self._lock = threading.Lock()

    def get(self, kind: str, t: float) -> ExpElement:
        key = (kind, float(t).hex())
        elem = self.entries.get(key)
        if elem is None:
            with self._lock:
                elem = self.entries.get(key)
                if elem is None:
                    elem = build_element(self.grid, self.alpha, kind, t)
                    self.entries[key] = elem
        return elem

    def eig(self, kind: str, t: float) -> np.ndarray:
        return self.get(kind, t).eig


def exp_table_get(table: ExpTable, kind: str, t: float) -> ExpElement:
    return table.get(kind, t)
