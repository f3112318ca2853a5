"""(K, L, c)-atoms, synthesis, and analysis through the Calderon reproducing formula.

An atom attached to the cube Q of level j is supported in the concentric cube
cQ, satisfies 2^(-j|alpha|) |D^alpha a| <= 1 for |alpha| <= K and, for j >= 1,
has vanishing moments up to order L.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .analysis import ResolutionOfUnity, blocks
from .errors import ArgumentError, ConstructionError, DecompositionError, PreconditionError
from .lattice import DyadicCube, SampledField, TorusGrid, frequency_axes, frequency_norm
from .spaces import CoefficientSequence, SpaceParams, lambda_star

SUPPORT_TOL = 1e-10
BOUND_TOL = 1e-6
MOMENT_TOL = 1e-8
MIN_SAMPLES_LOG2 = 4


@dataclass(frozen=True)
class AtomSpec:
    K: int = 0
    L: int = -1
    c: float = 2.0

    def __post_init__(self):
        if self.K < 0 or int(self.K) != self.K:
            raise ArgumentError("K must be a nonnegative integer")
        if self.L < -1 or int(self.L) != self.L:
            raise ArgumentError("L must be an integer >= -1")
        if not self.c > 1:
            raise ArgumentError("c must exceed 1")

    @classmethod
    def for_space(cls, params: SpaceParams, space="B", c=2.0):
        """Smallest (K, L) for which atomic decompositions hold at these parameters."""
        K = max(math.floor(1 + params.s), 0)
        sigma = params.sigma_p if space.upper() == "B" else params.sigma_pq
        L = max(-1, math.floor(sigma - params.s))
        return cls(K, L, c)

    def to_json(self):
        return {"K": self.K, "L": self.L, "c": self.c}


@dataclass(frozen=True, eq=False)
class Atom:
    cube: DyadicCube
    values: SampledField
    spec: AtomSpec


@dataclass
class AtomValidation:
    valid: bool
    worst_derivative_excess: float
    worst_moment: float
    support_leak: float = 0.0

    def to_json(self):
        return {
            "valid": self.valid,
            "worst_derivative_excess": self.worst_derivative_excess,
            "worst_moment": self.worst_moment,
            "support_leak": self.support_leak,
        }


def multi_indices(d, order):
    """All alpha in N^d with |alpha| <= order, graded then lexicographic."""
    if order < 0:
        return []
    out = [a for a in itertools.product(range(order + 1), repeat=d) if sum(a) <= order]
    return sorted(out, key=lambda a: (sum(a), a))


def _relative_coords(grid: TorusGrid, Q: DyadicCube):
    """Per-axis periodic offsets x - center(Q), each in [-T/2, T/2)."""
    T = grid.extent
    x = grid.coordinates()
    out = []
    for ax, k in enumerate(Q.k):
        center = (k + 0.5) * Q.side
        rel = np.mod(x - center + T / 2, T) - T / 2
        shape = [1] * grid.d
        shape[ax] = grid.N
        out.append(rel.reshape(shape))
    return out


def support_mask(grid: TorusGrid, Q: DyadicCube, c: float):
    """Indicator of the dilated cube cQ on the torus."""
    half = 0.5 * c * Q.side
    if 2 * half >= grid.extent:
        return np.ones(grid.shape, dtype=bool)
    mask = np.ones(grid.shape, dtype=bool)
    for rel in _relative_coords(grid, Q):
        mask = mask & (np.abs(rel) <= half * (1 + 1e-12))
    return mask


def _derivative_symbols(grid: TorusGrid, alphas):
    axes = frequency_axes(grid)
    out = []
    for a in alphas:
        sym = np.ones(grid.shape, dtype=complex)
        for w, k in zip(axes, a):
            if k:
                sym = sym * (1j * w) ** k
        out.append(sym)
    return out


def derivative_ratio(values, grid: TorusGrid, Q: DyadicCube, K: int, mask=None):
    """max over |alpha| <= K and x in cQ of 2^(-j|alpha|) |D^alpha a(x)|."""
    alphas = multi_indices(grid.d, K)
    F = np.fft.fftn(values)
    worst = 0.0
    for a, sym in zip(alphas, _derivative_symbols(grid, alphas)):
        if sum(a) == 0:
            der = np.abs(values)
        else:
            der = np.abs(np.fft.ifftn(sym * F))
        if mask is not None:
            der = der[mask]
        if der.size:
            worst = max(worst, 2.0 ** (-Q.j * sum(a)) * float(np.max(der)))
    return worst


def _check_resolution(grid: TorusGrid, Q: DyadicCube):
    if grid.n - Q.j < MIN_SAMPLES_LOG2:
        raise PreconditionError(
            f"grid under-resolves level {Q.j}: needs n - j >= {MIN_SAMPLES_LOG2} "
            f"(at least {2 ** MIN_SAMPLES_LOG2} samples across the cube), have n={grid.n}"
        )


def validate_atom(a: Atom) -> AtomValidation:
    """Check support, scaled derivative bounds and vanishing moments of an atom.

    Derivative bounds are checked on cQ only; outside cQ the support check on
    the samples themselves applies.
    """
    grid = a.values.grid
    Q = a.cube
    _check_resolution(grid, Q)
    vals = a.values.values
    mask = support_mask(grid, Q, a.spec.c)
    leak = float(np.max(np.abs(vals[~mask]))) if np.any(~mask) else 0.0
    excess = derivative_ratio(vals, grid, Q, a.spec.K, mask)
    worst_moment = 0.0
    if a.spec.L >= 0 and Q.j >= 1:
        rel = _relative_coords(grid, Q)
        l1 = grid.cell_volume * float(np.sum(np.abs(vals)))
        scale = a.spec.c * Q.side
        if l1 > 0:
            for beta in multi_indices(grid.d, a.spec.L):
                mono = np.ones(grid.shape)
                for r, b in zip(rel, beta):
                    if b:
                        mono = mono * r**b
                mom = abs(grid.cell_volume * np.sum(mono * vals))
                worst_moment = max(worst_moment, float(mom / (l1 * scale ** sum(beta))))
    valid = leak < SUPPORT_TOL and excess <= 1 + BOUND_TOL and worst_moment <= MOMENT_TOL
    return AtomValidation(bool(valid), excess, worst_moment, leak)


def _bump(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - t * t, 1.0)), 0.0)


def _tensor_bump(rel, radius):
    out = None
    for r in rel:
        b = _bump(r / radius)
        out = b if out is None else out * b
    return out


def make_atom(Q: DyadicCube, spec: AtomSpec, grid: TorusGrid) -> Atom:
    """Deterministic smooth atom for Q.

    A tensor-product bump supported in cQ has its moments up to order L removed
    by subtracting bump^2 times a polynomial, then is rescaled so the largest
    scaled derivative equals one.  The atom is built for the cube with offset 0
    and shifted by whole cubes, so translates agree exactly.
    """
    _check_resolution(grid, Q)
    if len(Q.k) != grid.d:
        raise ArgumentError("cube dimension does not match grid")
    M = grid.cells_per_axis(Q.j)
    if any(not 0 <= x < M for x in Q.k):
        raise ArgumentError(f"cube {Q} is not inside the domain")
    radius = 0.5 * spec.c * Q.side
    if 2 * radius > grid.extent:
        raise ArgumentError(
            f"dilated cube of side {2 * radius} does not fit in the torus of side {grid.extent}; increase m"
        )
    Q0 = DyadicCube(Q.j, (0,) * grid.d)
    rel = _relative_coords(grid, Q0)
    t = [r / radius for r in rel]
    b = _tensor_bump(rel, radius)
    a = b.copy()
    if spec.L >= 0 and Q.j >= 1:
        betas = multi_indices(grid.d, spec.L)
        monos = []
        for beta in betas:
            m_ = np.ones(grid.shape)
            for ti, k in zip(t, beta):
                if k:
                    m_ = m_ * ti**k
            monos.append(m_)
        w = b * b
        gram = np.array([[np.sum(mi * mk * w) for mk in monos] for mi in monos])
        rhs = np.array([np.sum(mi * b) for mi in monos])
        try:
            cond = np.linalg.cond(gram)
        except np.linalg.LinAlgError:
            cond = math.inf
        if not np.isfinite(cond) or cond > 1e12:
            raise ConstructionError(f"moment system for {Q} is singular at this resolution (cond={cond:.3g})")
        coef = np.linalg.solve(gram, rhs)
        a = b - w * sum(c_ * m_ for c_, m_ in zip(coef, monos))
        if np.max(np.abs(a)) < 1e-8 * np.max(np.abs(b)):
            raise ConstructionError(f"removing moments annihilated the bump for {Q}")
    ratio = derivative_ratio(a, grid, Q0, spec.K, support_mask(grid, Q0, spec.c))
    a = a / ratio
    shift = tuple(k * grid.samples_per_cube(Q.j) for k in Q.k)
    a = np.roll(a, shift, axis=tuple(range(grid.d)))
    return Atom(Q, SampledField(grid, a.astype(complex)), spec)


def synthesize(lam: CoefficientSequence, atoms) -> SampledField:
    """Sum of lambda_{j,k} times the atom attached to (j, k)."""
    grid = lam.grid
    out = np.zeros(grid.shape, dtype=complex)
    for (j, k), v in lam.items():
        atom = atoms.get((j, k))
        if atom is None:
            raise ArgumentError(f"no atom supplied for nonzero coefficient at level {j}, offset {k}")
        if atom.values.grid != grid:
            raise ArgumentError("atom grid does not match coefficient grid")
        out += v * atom.values.values
    return SampledField(grid, out)


# ---------------------------------------------------------------------------
# Calderon reproducing formula

@dataclass(frozen=True, eq=False)
class CalderonDual:
    rou: ResolutionOfUnity
    upsilon: tuple


def calderon_pair(rou: ResolutionOfUnity, floor: float = 0.25) -> CalderonDual:
    """Dual symbols upsilon_j = theta_j / sum_k theta_k^2.

    Inside the covered band |xi| <= 2^Jmax the denominator is at least 1/2.
    Beyond it, where the top annulus fades out, symbols are set to zero once
    the denominator drops below ``floor``.
    """
    den = np.zeros(rou.grid.shape)
    for t in rou.theta:
        den = den + t * t
    covered = frequency_norm(rou.grid) <= 2.0**rou.J_max
    if np.min(den[covered]) < 0.1:
        raise ConstructionError("sum of squared symbols drops below 0.1 inside the covered band")
    safe = np.where(den >= floor, den, 1.0)
    ups = tuple(np.where(den >= floor, t / safe, 0.0) for t in rou.theta)
    for u in ups:
        u.setflags(write=False)
    return CalderonDual(rou, ups)


@dataclass(frozen=True, eq=False)
class CalderonAnalysis:
    lam: CoefficientSequence
    recon: SampledField
    contributions: tuple


def band_excess(f: SampledField, J_max: int) -> float:
    """Largest spectral magnitude beyond |xi| = 2^Jmax relative to the largest overall."""
    F = np.abs(np.fft.fftn(f.values))
    top = float(F.max())
    if top == 0:
        return 0.0
    out = frequency_norm(f.grid) > 2.0**J_max
    return float(F[out].max() / top) if np.any(out) else 0.0


def analyze_calderon(f: SampledField, rou: ResolutionOfUnity, dual: CalderonDual, band_tol=1e-10) -> CalderonAnalysis:
    """Coefficients lambda_{j,k} = 2^(-jd) block_j(f)(2^-j k) and the resynthesized field."""
    grid = f.grid
    if rou.grid != grid or dual.rou.grid != grid:
        raise ArgumentError("grid mismatch between field and resolution")
    excess = band_excess(f, rou.J_max)
    if excess > band_tol:
        raise PreconditionError(
            f"field is not band-limited to |xi| <= 2^{rou.J_max}: relative out-of-band magnitude {excess:.3g} > {band_tol:g}"
        )
    d = grid.d
    levels = []
    contributions = []
    recon = np.zeros(grid.shape, dtype=complex)
    for j, b in enumerate(blocks(f, rou)):
        S = grid.samples_per_cube(j)
        M = grid.cells_per_axis(j)
        samples = b.values[(slice(None, None, S),) * d]
        lam_j = 2.0 ** (-j * d) * samples
        levels.append(lam_j)
        C = np.fft.fftn(lam_j)
        tiled = np.tile(C, (grid.N // M,) * d)
        contrib = np.fft.ifftn(dual.upsilon[j] * tiled) * 2.0 ** (grid.n * d)
        contributions.append(contrib)
        recon = recon + contrib
    lam = CoefficientSequence(grid, levels)
    return CalderonAnalysis(lam, SampledField(grid, recon), tuple(contributions))


def calderon_kernel(dual: CalderonDual, j: int):
    """Samples of the inverse transform of upsilon_j, normalized as a convolution kernel."""
    grid = dual.rou.grid
    return np.fft.ifftn(dual.upsilon[j]) / grid.cell_volume


def partition_windows(grid: TorusGrid, j: int, c: float):
    """Smooth partition of unity at level j; window k is supported in cQ_{j,k}.

    Returns the window for offset 0 and the normalizer; window k is the roll of
    bump_0 by k cubes divided by the normalizer.
    """
    M = grid.cells_per_axis(j)
    if M == 1:
        return np.ones(grid.shape), np.ones(grid.shape)
    side = 2.0 ** (-j)
    radius = min(0.5 * c * side, 0.5 * grid.extent)
    Q0 = DyadicCube(j, (0,) * grid.d)
    b0 = _tensor_bump(_relative_coords(grid, Q0), radius)
    S = grid.samples_per_cube(j)
    norm = np.zeros(grid.shape)
    axes = tuple(range(grid.d))
    for k in itertools.product(range(M), repeat=grid.d):
        norm = norm + np.roll(b0, tuple(x * S for x in k), axis=axes)
    return b0, norm


@dataclass(frozen=True, eq=False)
class AtomicDecomposition:
    atoms: dict
    r: CoefficientSequence
    C_norm: float
    lam: CoefficientSequence
    analysis: CalderonAnalysis

    def synthesize(self) -> SampledField:
        return synthesize(self.r, self.atoms)


def decompose_atomic(
    f: SampledField,
    rou: ResolutionOfUnity,
    dual: CalderonDual,
    spec: AtomSpec,
    params: SpaceParams,
    delta=None,
    band_tol=1e-10,
    max_log2_norm=20,
) -> AtomicDecomposition:
    """Atomic decomposition built from the Calderon formula.

    Each level-j contribution is split by a smooth partition of unity whose
    pieces live in the dilated cubes cQ_{j,k}; the piece on Q_{j,k} divided by
    r_{j,k} = C * lambda*_{j,k} is the atom.  C is the smallest power of two
    for which every atom satisfies the scaled derivative bound on cQ.
    """
    grid = f.grid
    d = grid.d
    delta = d + 1.0 if delta is None else float(delta)
    if not delta > d:
        raise ArgumentError("delta must exceed d")
    ana = analyze_calderon(f, rou, dual, band_tol)
    lam = ana.lam
    if lam.nnz() == 0:
        return AtomicDecomposition({}, CoefficientSequence.zeros(grid, lam.J_max), 1.0, lam, ana)
    lstar = lambda_star(lam, min(params.p, params.q), delta)
    axes = tuple(range(d))
    pieces = {}
    worst = 0.0
    worst_cube = None
    for j, contrib in enumerate(ana.contributions):
        if not np.any(lam.levels[j]):
            continue
        b0, norm = partition_windows(grid, j, spec.c)
        S = grid.samples_per_cube(j)
        for k in itertools.product(range(grid.cells_per_axis(j)), repeat=d):
            Q = DyadicCube(j, k)
            w = np.roll(b0, tuple(x * S for x in k), axis=axes) / norm
            piece = w * contrib
            ls = float(abs(lstar[j, k]))
            pieces[(j, k)] = piece
            if ls == 0:
                continue
            ratio = derivative_ratio(piece, grid, Q, spec.K, support_mask(grid, Q, spec.c)) / ls
            if ratio > worst:
                worst, worst_cube = ratio, Q
    expo = math.ceil(math.log2(worst)) if worst > 0 else 0
    C = 2.0**expo
    if worst / C > 1:
        C *= 2
        expo += 1
    if expo > max_log2_norm:
        raise DecompositionError(
            f"scaled derivative bound needs normalization 2^{expo} > 2^{max_log2_norm} at cube {worst_cube}"
        )
    r = lstar * C
    atoms = {}
    for (j, k), piece in pieces.items():
        rv = r[j, k]
        vals = piece / rv.real if rv != 0 else np.zeros(grid.shape, dtype=complex)
        atoms[(j, k)] = Atom(DyadicCube(j, k), SampledField(grid, vals), spec)
    return AtomicDecomposition(atoms, r, C, lam, ana)
