"""Fourier-side operators on the torus grid.

Frequencies are angular: the lattice mode with index k carries
xi = 2*pi*k / 2^m, so the annulus boundaries |xi| = 2^j of the dyadic
resolution of unity are measured on the same scale as the spatial cubes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .lattice import FieldSequence, SampledField, TorusGrid, frequency_axes, frequency_norm


def smoothstep(r, sharpness=1.0):
    """Radial profile equal to 1 on [0, 1], 0 on [3/2, inf), C-infinity between.

    S(r) = psi(3 - 2r) / (psi(3 - 2r) + psi(2r - 2)) with psi(t) = exp(-sharpness/t)
    for t > 0 and 0 otherwise.
    """
    r = np.asarray(r, dtype=float)
    a = 3.0 - 2.0 * r
    b = 2.0 * r - 2.0
    with np.errstate(divide="ignore", over="ignore"):
        pa = np.where(a > 0, np.exp(-sharpness / np.where(a > 0, a, 1.0)), 0.0)
        pb = np.where(b > 0, np.exp(-sharpness / np.where(b > 0, b, 1.0)), 0.0)
    return pa / (pa + pb)


@dataclass(frozen=True, eq=False)
class ResolutionOfUnity:
    grid: TorusGrid
    J_max: int
    theta: tuple
    sharpness: float = 1.0

    def __len__(self):
        return len(self.theta)

    def __getitem__(self, j):
        return self.theta[j]

    def partial_sum(self, J=None):
        J = self.J_max if J is None else J
        out = np.zeros(self.grid.shape)
        for t in self.theta[: J + 1]:
            out = out + t
        return out


def max_levels(grid: TorusGrid) -> int:
    return grid.n - 2


def build_resolution(grid: TorusGrid, J_max: int, sharpness: float = 1.0) -> ResolutionOfUnity:
    """Symbols theta_0..theta_Jmax sampled on the frequency lattice."""
    if J_max < 0:
        raise ArgumentError("J_max must be >= 0")
    if J_max > max_levels(grid):
        raise ArgumentError(f"J_max={J_max} exceeds the largest legal value n-2={max_levels(grid)} for this grid")
    if not sharpness > 0:
        raise ArgumentError("sharpness must be positive")
    xi = frequency_norm(grid)
    scaled = [smoothstep(xi * 2.0 ** (-j), sharpness) for j in range(J_max + 1)]
    theta = [scaled[0]] + [scaled[j] - scaled[j - 1] for j in range(1, J_max + 1)]
    for t in theta:
        t.setflags(write=False)
    return ResolutionOfUnity(grid, J_max, tuple(theta), sharpness)


def _check_grid(f: SampledField, grid: TorusGrid):
    if f.grid != grid:
        raise ArgumentError(f"grid mismatch: field on {f.grid}, operator on {grid}")


def _fft(a):
    return np.fft.fftn(a)


def _ifft(a):
    return np.fft.ifftn(a)


def lp_block(f: SampledField, rou: ResolutionOfUnity, j: int) -> SampledField:
    """Inverse transform of theta_j times the transform of f."""
    _check_grid(f, rou.grid)
    if not 0 <= j <= rou.J_max:
        raise ArgumentError(f"block index {j} outside [0, {rou.J_max}]")
    return SampledField(f.grid, _ifft(rou.theta[j] * _fft(f.values)))


def blocks(f: SampledField, rou: ResolutionOfUnity) -> FieldSequence:
    """All Littlewood-Paley blocks, sharing one forward transform."""
    _check_grid(f, rou.grid)
    F = _fft(f.values)
    return FieldSequence(f.grid, tuple(SampledField(f.grid, _ifft(t * F)) for t in rou.theta))


# ---------------------------------------------------------------------------
# maximal operators

def _window_levels(grid: TorusGrid, window_levels):
    levels = sorted(set(int(x) for x in window_levels))
    if not levels:
        raise ArgumentError("window_levels is empty")
    if levels[0] < -grid.m or levels[-1] > grid.n:
        raise ArgumentError(f"window levels must lie in [{-grid.m}, {grid.n}]")
    return levels


def _box_sums(a, S):
    # out[c] = sum of a over the periodic box [c, c+S) in every axis; S is a power of two
    out = a
    for ax in range(a.ndim):
        s = 1
        while s < S:
            out = out + np.roll(out, -s, axis=ax)
            s *= 2
    return out


def _box_max_covering(a, S):
    # out[x] = max of a over corners c with x in [c, c+S), i.e. c in (x-S, x]
    out = a
    for ax in range(a.ndim):
        s = 1
        while s < S:
            out = np.maximum(out, np.roll(out, s, axis=ax))
            s *= 2
    return out


def hl_maximal(f: SampledField, window_levels=None) -> SampledField:
    """Maximal mean of |f| over grid-aligned cubes of dyadic side containing each point.

    Windows have side 2^-l for l in ``window_levels`` and may sit at any grid
    translate (periodic wrap), not only at dyadic positions.
    """
    grid = f.grid
    levels = _window_levels(grid, range(-grid.m, grid.n + 1) if window_levels is None else window_levels)
    a = np.abs(f.values).astype(float)
    out = np.zeros_like(a)
    for lev in levels:
        S = grid.samples_per_cube(lev)
        means = _box_sums(a, S) / float(S) ** grid.d
        out = np.maximum(out, _box_max_covering(means, S))
    return SampledField(grid, out)


def powered_maximal(f: SampledField, eta: float, window_levels=None) -> SampledField:
    if not eta > 0:
        raise ArgumentError("eta must be positive")
    if eta == 1:
        return hl_maximal(f, window_levels)
    g = SampledField(f.grid, np.abs(f.values) ** eta)
    return SampledField(f.grid, hl_maximal(g, window_levels).values ** (1.0 / eta))


@dataclass(frozen=True)
class PeetreParams:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ArgumentError("Peetre decay exponent a must be positive")


def torus_offsets(grid: TorusGrid):
    """Index offsets (as an (N^d, d) array) and their periodic Euclidean lengths."""
    N = grid.N
    idx = np.arange(N)
    per_axis = np.minimum(idx, N - idx) * grid.h
    grids = np.meshgrid(*([idx] * grid.d), indexing="ij")
    offs = np.stack([g.reshape(-1) for g in grids], axis=1)
    dist2 = np.zeros(offs.shape[0])
    for ax in range(grid.d):
        dist2 = dist2 + per_axis[offs[:, ax]] ** 2
    return offs, np.sqrt(dist2)


def peetre_maximal(f: SampledField, rou: ResolutionOfUnity, j: int, params) -> SampledField:
    """max over grid offsets y of |block_j f(x - y)| / (1 + |2^j y|^a)."""
    a = params.a if isinstance(params, PeetreParams) else PeetreParams(float(params)).a
    b = np.abs(lp_block(f, rou, j).values)
    return SampledField(f.grid, _peetre_from_abs(b, f.grid, j, a))


def _peetre_from_abs(b, grid, j, a):
    offs, dist = torus_offsets(grid)
    denom = 1.0 + (2.0**j * dist) ** a
    order = np.argsort(denom, kind="stable")
    result = b.copy()
    bmax = float(b.max()) if b.size else 0.0
    if bmax == 0.0:
        return result
    for i in order[1:]:
        # remaining offsets have larger denominators, so they cannot raise any value
        if bmax / denom[i] <= result.min():
            break
        shift = tuple(int(x) for x in offs[i])
        np.maximum(result, np.roll(b, shift, axis=tuple(range(grid.d))) / denom[i], out=result)
    return result


# ---------------------------------------------------------------------------
# multipliers

def lift_symbol(grid: TorusGrid, kappa: float):
    return (1.0 + frequency_norm(grid) ** 2) ** (kappa / 2.0)


def lift(f: SampledField, kappa: float) -> SampledField:
    """Bessel-potential lift with symbol (1 + |xi|^2)^(kappa/2)."""
    if kappa == 0:
        return SampledField(f.grid, f.values.copy())
    return SampledField(f.grid, _ifft(lift_symbol(f.grid, kappa) * _fft(f.values)))


def apply_multiplier(f: SampledField, mu_hat) -> SampledField:
    mu = np.asarray(mu_hat)
    if mu.shape != f.grid.shape:
        raise ArgumentError(f"symbol shape {mu.shape} does not match grid {f.grid.shape}")
    if not np.all(np.isfinite(mu)):
        raise ArgumentError("symbol must be finite")
    return SampledField(f.grid, _ifft(mu * _fft(f.values)))


def derivative(f: SampledField, alpha) -> SampledField:
    """Spectral partial derivative D^alpha."""
    alpha = tuple(int(x) for x in alpha)
    if len(alpha) != f.grid.d:
        raise ArgumentError("multi-index length must equal d")
    if not any(alpha):
        return SampledField(f.grid, f.values.astype(complex))
    sym = np.ones(f.grid.shape, dtype=complex)
    for w, k in zip(frequency_axes(f.grid), alpha):
        if k:
            sym = sym * (1j * w) ** k
    return SampledField(f.grid, _ifft(sym * _fft(f.values)))


def weighted_mix(g: FieldSequence, gamma: float) -> FieldSequence:
    """G_j = sum_k 2^(-|k-j| gamma) |g_k|."""
    if not gamma > 0:
        raise ArgumentError("gamma must be positive")
    absg = [np.abs(x.values) for x in g.fields]
    J = len(absg)
    out = []
    for j in range(J):
        acc = np.zeros(g.grid.shape)
        for k in range(J):
            acc = acc + 2.0 ** (-abs(k - j) * gamma) * absg[k]
        out.append(SampledField(g.grid, acc))
    return FieldSequence(g.grid, tuple(out))
