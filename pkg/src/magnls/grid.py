"""Periodic-box discretization: grid geometry, complex fields, spectral calculus.

Everything downstream (operators, solvers, diagnostics) is built on the three
types defined here.  Conventions, fixed once:

* the box is centered, axis i samples x = -L_i/2 + j*h_i with h_i = L_i/n_i;
* the wavenumber lattice per axis is (2*pi/L_i) * {-n_i/2, ..., n_i/2 - 1},
  stored in FFT order (non-negative modes first);
* ``dft`` approximates the continuum Fourier integral: it is the plain FFT
  scaled by the volume element, so a constant c maps to a single zero-mode
  bin of weight c * volume;
* all physical-side norms and inner products carry the volume element, and
  the frequency-side L2 norm carries 1/volume, which makes the two sides
  agree exactly (discrete Parseval).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, MagnlsError

SNAPSHOT_MAGIC = b"MNLSFLD1"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on a centered periodic box in 1, 2, or 3 dimensions."""

    dim: int
    sizes: tuple[int, ...]
    box_lengths: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise MagnlsError(f"grid dimension must be 1, 2, or 3, got {self.dim}")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "box_lengths", tuple(float(x) for x in self.box_lengths))
        if len(self.sizes) != self.dim or len(self.box_lengths) != self.dim:
            raise MagnlsError("sizes and box_lengths must both have one entry per axis")
        for n in self.sizes:
            if n < 8 or not _is_power_of_two(n):
                raise MagnlsError(f"axis size {n} is not a power of two >= 8")
        for length in self.box_lengths:
            if not (length > 0.0) or not np.isfinite(length):
                raise MagnlsError(f"box length {length} must be positive and finite")

    @cached_property
    def spacings(self) -> tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.box_lengths, self.sizes))

    @cached_property
    def volume_element(self) -> float:
        return float(np.prod(self.spacings))

    @cached_property
    def volume(self) -> float:
        return float(np.prod(self.box_lengths))

    @property
    def total_points(self) -> int:
        return int(np.prod(self.sizes))

    def axis_coords(self, axis: int) -> np.ndarray:
        n = self.sizes[axis]
        h = self.spacings[axis]
        return -0.5 * self.box_lengths[axis] + h * np.arange(n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Meshed coordinate arrays, one per axis, each of shape ``sizes``."""
        axes = [self.axis_coords(i) for i in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x * x for x in self.coords))

    def axis_wavenumbers(self, axis: int) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.sizes[axis], d=self.spacings[axis])

    @cached_property
    def k_mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis_wavenumbers(i) for i in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k * k for k in self.k_mesh)


@dataclass(frozen=True)
class ComplexField:
    """A complex scalar field sampled on a grid.  Values are immutable."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.shape != self.grid.sizes:
            raise GridMismatchError(
                f"field shape {arr.shape} does not match grid sizes {self.grid.sizes}")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise MagnlsError("field contains non-finite samples")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)


@dataclass(frozen=True)
class VectorField:
    """A tuple of component fields on one shared grid (e.g. a vector potential)."""

    components: tuple[ComplexField, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise MagnlsError("vector field needs at least one component")
        g = self.components[0].grid
        for c in self.components[1:]:
            if c.grid != g:
                raise GridMismatchError("vector field components live on different grids")
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    def component_values(self) -> list[np.ndarray]:
        return [c.values for c in self.components]


def make_field(grid: GridSpec, values: np.ndarray) -> ComplexField:
    return ComplexField(grid, values)


def zeros(grid: GridSpec) -> ComplexField:
    return ComplexField(grid, np.zeros(grid.sizes, dtype=np.complex128))


def zero_vector_field(grid: GridSpec) -> VectorField:
    return VectorField(tuple(zeros(grid) for _ in range(grid.dim)))


def from_function(grid: GridSpec, fn) -> ComplexField:
    """Sample ``fn(*coords)`` on the grid."""
    return ComplexField(grid, np.asarray(fn(*grid.coords), dtype=np.complex128))


def require_same_grid(*fields) -> GridSpec:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError("operands live on different grids")
    return g


# ---------------------------------------------------------------------------
# spectral transforms and calculus
# ---------------------------------------------------------------------------

def dft(f: ComplexField) -> ComplexField:
    """Forward transform, scaled so a constant c has zero-mode weight c*volume."""
    return ComplexField(f.grid, np.fft.fftn(f.values) * f.grid.volume_element)


def idft(fhat: ComplexField) -> ComplexField:
    return ComplexField(fhat.grid, np.fft.ifftn(fhat.values) / fhat.grid.volume_element)


def freq_norm_l2(fhat: ComplexField) -> float:
    """Frequency-side L2 norm; equals the physical-side norm by Parseval."""
    return float(np.sqrt(np.sum(np.abs(fhat.values) ** 2) / fhat.grid.volume))


def gradient(f: ComplexField) -> VectorField:
    """Spectral gradient: multiply by i*k_j per axis."""
    g = f.grid
    fhat = np.fft.fftn(f.values)
    comps = tuple(
        ComplexField(g, np.fft.ifftn(1j * g.k_mesh[j] * fhat)) for j in range(g.dim)
    )
    return VectorField(comps)


def laplacian(f: ComplexField) -> ComplexField:
    g = f.grid
    fhat = np.fft.fftn(f.values)
    return ComplexField(g, np.fft.ifftn(-g.k_squared * fhat))


def divergence(a: VectorField) -> ComplexField:
    g = a.grid
    out = np.zeros(g.sizes, dtype=np.complex128)
    for j, comp in enumerate(a.components):
        out += np.fft.ifftn(1j * g.k_mesh[j] * np.fft.fftn(comp.values))
    return ComplexField(g, out)


# ---------------------------------------------------------------------------
# inner products and basic norms
# ---------------------------------------------------------------------------

def inner_l2(f: ComplexField, g: ComplexField) -> complex:
    """Volume-weighted complex inner product, conjugate-linear in ``f``."""
    require_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.volume_element)


def inner_real(f: ComplexField, g: ComplexField) -> float:
    """Real pairing Re(integral of conj(f)*g): the symplectic-geometry pairing."""
    return inner_l2(f, g).real


def norm_l2(f: ComplexField) -> float:
    return float(np.linalg.norm(f.values.ravel()) * np.sqrt(f.grid.volume_element))


def tail_mass_fraction(f: ComplexField) -> float:
    """Fraction of the squared mass carried by the outer 10% shell of the box.

    The shell is measured per axis: a sample belongs to it when any
    |x_i| / (L_i/2) exceeds 0.9.  Used to warn when a run is about to be
    polluted by wrap-around.
    """
    g = f.grid
    shell = np.zeros(g.sizes, dtype=bool)
    for i in range(g.dim):
        shell |= np.abs(g.coords[i]) / (0.5 * g.box_lengths[i]) > 0.9
    total = float(np.sum(np.abs(f.values) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(f.values[shell]) ** 2) / total)


# ---------------------------------------------------------------------------
# field snapshots (portable binary format)
# ---------------------------------------------------------------------------
# Layout: 8-byte ASCII magic "MNLSFLD1", u32 LE rank d, then d u64 LE axis
# sizes, d f64 LE box lengths, then prod(n_i) complex samples as (re, im)
# f64 LE pairs in row-major order with the last axis fastest.

def write_field(path, f: ComplexField) -> None:
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", g.dim))
        fh.write(struct.pack(f"<{g.dim}Q", *g.sizes))
        fh.write(struct.pack(f"<{g.dim}d", *g.box_lengths))
        fh.write(np.ascontiguousarray(f.values).astype("<c16", copy=False).tobytes())


def read_field(path) -> ComplexField:
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise MagnlsError(f"{path}: bad magic {raw[:8]!r}, expected {SNAPSHOT_MAGIC!r}")
    off = 8
    (dim,) = struct.unpack_from("<I", raw, off)
    off += 4
    sizes = struct.unpack_from(f"<{dim}Q", raw, off)
    off += 8 * dim
    lengths = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    grid = GridSpec(dim, tuple(int(n) for n in sizes), tuple(lengths))
    count = grid.total_points
    expected = off + 16 * count
    if len(raw) != expected:
        raise MagnlsError(
            f"{path}: payload is {len(raw) - off} bytes, expected {16 * count}")
    values = np.frombuffer(raw, dtype="<c16", count=count, offset=off)
    return ComplexField(grid, values.reshape(grid.sizes).astype(np.complex128))
