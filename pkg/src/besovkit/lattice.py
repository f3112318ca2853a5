"""Dyadic cubes, the periodic sampling grid, and sampled fields.

The domain is the torus [0, 2^m)^d sampled with spacing h = 2^-n, so each
axis carries N = 2^(m+n) samples.  A dyadic cube of level j has side 2^-j and
covers 2^(n-j) samples per axis; all levels -m <= j <= n tile the domain.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True)
class DyadicCube:
    j: int
    k: tuple

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))

    @property
    def d(self):
        return len(self.k)

    @property
    def side(self):
        return 2.0 ** (-self.j)

    @property
    def volume(self):
        return 2.0 ** (-self.j * self.d)

    @property
    def level0(self):
        """max(j, 0), the first level counted in the block sums over this cube."""
        return max(self.j, 0)

    @property
    def corner(self):
        return tuple(self.side * x for x in self.k)

    def contains(self, x):
        return all(c <= xi < c + self.side for c, xi in zip(self.corner, x))

    def parent(self):
        return DyadicCube(self.j - 1, tuple(x // 2 for x in self.k))

    def children(self):
        return [
            DyadicCube(self.j + 1, tuple(2 * x + e for x, e in zip(self.k, bits)))
            for bits in itertools.product((0, 1), repeat=self.d)
        ]

    def to_json(self):
        return {"j": self.j, "k": list(self.k)}


@dataclass(frozen=True)
class TorusGrid:
    d: int = 1
    m: int = 0
    n: int = 9

    def __post_init__(self):
        if self.d < 1 or self.m < 0 or self.n < 1:
            raise ArgumentError("grid needs d >= 1, m >= 0, n >= 1")

    @property
    def N(self):
        return 2 ** (self.m + self.n)

    @property
    def h(self):
        return 2.0 ** (-self.n)

    @property
    def extent(self):
        return 2.0**self.m

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def size(self):
        return self.N**self.d

    @property
    def cell_volume(self):
        return self.h**self.d

    def cells_per_axis(self, j):
        return 2 ** (j + self.m)

    def samples_per_cube(self, j):
        return 2 ** (self.n - j)

    def check_level(self, j):
        if not -self.m <= j <= self.n:
            raise ArgumentError(f"cube level {j} outside [{-self.m}, {self.n}]")

    def coordinates(self):
        return np.arange(self.N) * self.h

    def frequencies(self):
        """Angular frequencies along one axis, in numpy FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def xi_norm(self):
        return frequency_norm(self)

    def to_json(self):
        return {"d": self.d, "m": self.m, "n": self.n}


@lru_cache(maxsize=32)
def _frequency_norm(d, m, n):
    g = TorusGrid(d, m, n)
    w = g.frequencies()
    sq = np.zeros(g.shape)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = g.N
        sq = sq + (w**2).reshape(shape)
    out = np.sqrt(sq)
    out.setflags(write=False)
    return out


def frequency_norm(grid: TorusGrid):
    """|xi| on the grid's frequency lattice (read-only, cached)."""
    return _frequency_norm(grid.d, grid.m, grid.n)


def frequency_axes(grid: TorusGrid):
    """Per-axis angular frequencies broadcastable against the grid shape."""
    w = grid.frequencies()
    out = []
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.N
        out.append(w.reshape(shape))
    return out


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            if v.size == self.grid.size:
                v = v.reshape(self.grid.shape)
            else:
                raise ArgumentError(f"field has {v.size} samples, grid needs {self.grid.size}")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("field samples must be finite")
        object.__setattr__(self, "values", v)

    @property
    def flat(self):
        return self.values.reshape(-1)

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SampledField(self.grid, self.values * c)

    __rmul__ = __mul__

    def sup(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class FieldSequence:
    """Level-indexed family g_0, ..., g_Jmax on a shared grid."""

    grid: TorusGrid
    fields: tuple

    def __post_init__(self):
        fs = tuple(self.fields)
        for f in fs:
            if isinstance(f, SampledField):
                _same_grid(self.grid, f.grid)
        fs = tuple(f if isinstance(f, SampledField) else SampledField(self.grid, f) for f in fs)
        object.__setattr__(self, "fields", fs)

    @property
    def J_max(self):
        return len(self.fields) - 1

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, j):
        return self.fields[j]

    def __iter__(self):
        return iter(self.fields)

    def arrays(self):
        return [f.values for f in self.fields]


def _same_grid(a, b):
    if a != b:
        raise ArgumentError(f"grid mismatch: {a} vs {b}")


def cubes_at_level(grid: TorusGrid, j: int):
    """All dyadic cubes of level j tiling the domain, in row-major order."""
    grid.check_level(j)
    M = grid.cells_per_axis(j)
    for k in itertools.product(range(M), repeat=grid.d):
        yield DyadicCube(j, k)


def cube_slices(grid: TorusGrid, Q: DyadicCube):
    grid.check_level(Q.j)
    S = grid.samples_per_cube(Q.j)
    M = grid.cells_per_axis(Q.j)
    if len(Q.k) != grid.d or any(not 0 <= x < M for x in Q.k):
        raise ArgumentError(f"cube {Q} is not inside the domain")
    return tuple(slice(x * S, (x + 1) * S) for x in Q.k)


def integrate_p(f: SampledField, Q: DyadicCube, p: float) -> float:
    """(h^d * sum over samples in Q of |f|^p)^(1/p)."""
    if not p > 0:
        raise ArgumentError("p must be positive")
    vals = np.abs(f.values[cube_slices(f.grid, Q)])
    return float((f.grid.cell_volume * np.sum(vals**p)) ** (1.0 / p))


def ell_infinity_on_cube(f: SampledField, Q: DyadicCube) -> float:
    return float(np.max(np.abs(f.values[cube_slices(f.grid, Q)])))


def coarsen(a: np.ndarray, factor: int, reduce="sum"):
    """Combine factor^d blocks of a d-dimensional array (sum or max)."""
    if factor == 1:
        return a
    d = a.ndim
    shape = []
    for s in a.shape:
        shape += [s // factor, factor]
    b = a.reshape(shape)
    axes = tuple(range(1, 2 * d, 2))
    return b.sum(axis=axes) if reduce == "sum" else b.max(axis=axes)


def refine(a: np.ndarray, factor: int):
    """Repeat each entry factor times along every axis."""
    if factor == 1:
        return a
    for ax in range(a.ndim):
        a = np.repeat(a, factor, axis=ax)
    return a


def level_sums(a: np.ndarray, grid: TorusGrid, j: int):
    """h^d times the sum of the sample array a over every cube of level j."""
    grid.check_level(j)
    return coarsen(a, grid.samples_per_cube(j)) * grid.cell_volume


# ---------------------------------------------------------------------------
# .ffld files

def _atomic_write_bytes(path, payload: bytes):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    _atomic_write_bytes(path, text.encode("utf-8"))


def write_ffld(path, f: SampledField):
    g = f.grid
    header = {"d": g.d, "m": g.m, "n": g.n, "dtype": "c128", "count": g.size}
    data = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    _atomic_write_bytes(path, (json.dumps(header) + "\n").encode("ascii") + data)


def read_ffld(path) -> SampledField:
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("ascii"))
            grid = TorusGrid(int(header["d"]), int(header["m"]), int(header["n"]))
            count = int(header["count"])
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise ArgumentError(f"{path}: malformed .ffld header") from exc
        if header.get("dtype") != "c128":
            raise ArgumentError(f"{path}: unsupported dtype {header.get('dtype')!r}")
        if count != grid.size:
            raise ArgumentError(f"{path}: count {count} does not match grid size {grid.size}")
        raw = fh.read()
    if len(raw) != 16 * count:
        raise ArgumentError(f"{path}: expected {16 * count} data bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(grid.shape)
    return SampledField(grid, values)
