"""Sine pseudo-spectral discretization on a rectangle with homogeneous Dirichlet data.

Grid functions are stored on the ``(N-1) x (N-1)`` interior nodes only; the
boundary values are zero by construction. Spectral coefficients use the
normalization

    uhat[p, q] = 4/N^2 * sum_{j,k} u[j, k] sin(mu_p (x_j - xL)) sin(nu_q (y_k - yL))

so that ``u`` is recovered as the plain sine-series sum of ``uhat``.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import GridMismatch, ReprMismatch


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid on ``(xL, xL+X) x (yL, yL+Y)`` with ``N-1`` interior nodes per axis."""

    xL: float
    yL: float
    X: float
    Y: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N!r}")
        if not (self.X > 0 and self.Y > 0):
            raise ValueError(f"domain extents must be positive, got X={self.X}, Y={self.Y}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def h1(self) -> float:
        return self.X / self.N

    @property
    def h2(self) -> float:
        return self.Y / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N - 1, self.N - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return self.xL + np.arange(1, self.N) * self.h1

    @cached_property
    def y(self) -> np.ndarray:
        return self.yL + np.arange(1, self.N) * self.h2

    @cached_property
    def mu(self) -> np.ndarray:
        return np.arange(1, self.N) * np.pi / self.X

    @cached_property
    def nu(self) -> np.ndarray:
        return np.arange(1, self.N) * np.pi / self.Y

    @cached_property
    def lambda2(self) -> np.ndarray:
        """Laplacian eigenvalue magnitudes ``mu_p^2 + nu_q^2`` indexed ``[p-1, q-1]``."""
        lam2 = self.mu[:, None] ** 2 + self.nu[None, :] ** 2
        lam2.setflags(write=False)
        return lam2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Interior node coordinates as two ``(N-1, N-1)`` arrays (``ij`` indexing)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def sample(self, fn, *args) -> np.ndarray:
        """Evaluate ``fn(x, y, *args)`` on the interior nodes as a complex array."""
        xx, yy = self.mesh()
        out = np.asarray(fn(xx, yy, *args), dtype=complex)
        return np.broadcast_to(out, self.shape).copy()


def make_grid(xL: float, yL: float, X: float, Y: float, N: int) -> Grid2D:
    return Grid2D(float(xL), float(yL), float(X), float(Y), N)


class Repr(enum.Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"


# Array-level transforms. DST-I of length N-1 computes 2*sum x_n sin(pi (k+1)(n+1)/N),
# so the two normalizations below reproduce the sine-series convention exactly.
def forward_array(u: np.ndarray) -> np.ndarray:
    N = u.shape[0] + 1
    return scipy.fft.dstn(u, type=1) / (N * N)


def inverse_array(uhat: np.ndarray) -> np.ndarray:
    return scipy.fft.dstn(uhat, type=1) * 0.25


@dataclass(frozen=True, eq=False)
class Field:
    """Complex grid function in physical (nodal) or spectral (sine-mode) form."""

    grid: Grid2D
    data: np.ndarray
    repr: Repr = Repr.PHYSICAL

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != self.grid.shape:
            raise ValueError(f"field shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, grid: Grid2D, repr: Repr = Repr.PHYSICAL) -> Field:
        return cls(grid, np.zeros(grid.shape, dtype=complex), repr)

    @classmethod
    def from_function(cls, grid: Grid2D, fn, *args) -> Field:
        return cls(grid, grid.sample(fn, *args))

    @property
    def is_spectral(self) -> bool:
        return self.repr is Repr.SPECTRAL

    def to_physical(self) -> Field:
        return dst_inverse(self) if self.is_spectral else self

    def to_spectral(self) -> Field:
        return self if self.is_spectral else dst_forward(self)

    def with_data(self, data: np.ndarray) -> Field:
        return Field(self.grid, data, self.repr)

    def _check(self, other: Field):
        if other.grid != self.grid:
            raise GridMismatch("fields live on different grids")
        if other.repr is not self.repr:
            raise ReprMismatch("fields have different representations")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_data(self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_data(self.data - other.data)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            return NotImplemented
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_data(-self.data)


def dst_forward(f: Field) -> Field:
    if f.is_spectral:
        raise ReprMismatch("dst_forward expects a physical field")
    return Field(f.grid, forward_array(f.data), Repr.SPECTRAL)


def dst_inverse(fhat: Field) -> Field:
    if not fhat.is_spectral:
        raise ReprMismatch("dst_inverse expects a spectral field")
    return Field(fhat.grid, inverse_array(fhat.data), Repr.PHYSICAL)


def laplacian(f: Field) -> Field:
    """Sine pseudo-spectral Laplacian; the result has the same representation as ``f``."""
    fhat = f.to_spectral()
    out = Field(f.grid, -f.grid.lambda2 * fhat.data, Repr.SPECTRAL)
    return out if f.is_spectral else dst_inverse(out)


def _same_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise GridMismatch("fields live on different grids")


def inner_l2(f: Field, g: Field) -> complex:
    """Discrete inner product ``h1 h2 sum f conj(g)`` over interior nodes."""
    _same_grid(f, g)
    fp, gp = f.to_physical(), g.to_physical()
    grid = f.grid
    return complex(grid.h1 * grid.h2 * np.vdot(gp.data, fp.data))


def parseval_factor(grid: Grid2D) -> float:
    """``(u, u)_l2 = parseval_factor * sum |uhat|^2``."""
    return grid.X * grid.Y / 4.0


@dataclass(frozen=True)
class Norms:
    l2: float
    lp: float
    p: float
    linf: float
    semi_h1: float
    semi_h2: float


def norms(f: Field, p: float = 4.0) -> Norms:
    if p < 1:
        raise ValueError(f"l^p norm needs p >= 1, got {p}")
    grid = f.grid
    phys = f.to_physical().data
    fhat = f.to_spectral().data
    w = grid.h1 * grid.h2
    absf = np.abs(phys)
    power = np.abs(fhat) ** 2
    scale = parseval_factor(grid)
    return Norms(
        l2=float(np.sqrt(w * np.sum(absf**2))),
        lp=float((w * np.sum(absf**p)) ** (1.0 / p)),
        p=float(p),
        linf=float(absf.max()),
        semi_h1=float(np.sqrt(scale * np.sum(grid.lambda2 * power))),
        semi_h2=float(np.sqrt(scale * np.sum(grid.lambda2**2 * power))),
    )


def semi_h1_sq(f: Field) -> float:
    """``|f|_{N,1}^2`` via the frequency sum (cheaper than building all norms)."""
    fhat = f.to_spectral().data
    return float(parseval_factor(f.grid) * np.sum(f.grid.lambda2 * np.abs(fhat) ** 2))


def l2_sq(f: Field) -> float:
    grid = f.grid
    return float(grid.h1 * grid.h2 * np.sum(np.abs(f.to_physical().data) ** 2))


def write_field_csv(path, f: Field) -> None:
    """Dump a physical field as rows ``j,k,Re,Im`` (1-based node indices, 17 digits)."""
    data = f.to_physical().data
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "k", "re", "im"])
        for (j, k), val in np.ndenumerate(data):
            w.writerow([j + 1, k + 1, f"{val.real:.17g}", f"{val.imag:.17g}"])
