"""Quasi-norms of the Besov-type and Triebel-Lizorkin-type scales.

Every norm is a supremum over dyadic cubes P of levels -m..J_max on the
torus of phi(side(P))^-1 times a local mixed norm, where the level sum starts
at max(j_P, 0).  The supremum is exhaustive: per-level block sums are formed
by reshaping, so each level costs one pass over the samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .analysis import ResolutionOfUnity, blocks
from .errors import ArgumentError, PreconditionError
from .lattice import DyadicCube, FieldSequence, SampledField, TorusGrid, coarsen, level_sums, refine
from .phi import PhiSpec, check_gp_membership, evaluate, find_epsilon

EPSILON_MESSAGE = (
    "epsilon-condition t^(eps-d/p) phi(t) <= C r^(eps-d/p) phi(r) (t >= r) "
    "not verified for this phi; the L^p_phi(l^q) norm with q < inf requires it"
)


@dataclass(frozen=True, eq=False)
class SpaceParams:
    """Parameters (s, p, q, phi) of a space; d is taken from phi.

    ``enforce_gp`` and ``enforce_epsilon`` switch off the admissibility checks
    for negative tests.  ``sum_from_zero`` starts every level sum at j = 0
    instead of max(j_P, 0).
    """

    s: float
    p: float
    q: float
    phi: PhiSpec
    enforce_gp: bool = True
    enforce_epsilon: bool = True
    sum_from_zero: bool = False

    def __post_init__(self):
        if not (0 < self.p < math.inf):
            raise ArgumentError("p must lie in (0, inf)")
        if not self.q > 0:
            raise ArgumentError("q must lie in (0, inf]")
        object.__setattr__(self, "q", float(self.q))
        if self.enforce_gp:
            res = check_gp_membership(self.phi, self.p, self.d)
            if not res.member:
                raise PreconditionError(
                    f"phi is not admissible at p={self.p}, d={self.d} "
                    f"(needs phi nondecreasing and t^(-d/p) phi(t) nonincreasing; witness {res.witness})"
                )

    @property
    def d(self):
        return self.phi.d

    @property
    def sigma_p(self):
        return self.d * max(1.0 / self.p - 1.0, 0.0)

    @property
    def sigma_q(self):
        return self.d * max(1.0 / self.q - 1.0, 0.0)

    @property
    def sigma_pq(self):
        return max(self.sigma_p, self.sigma_q)

    @cached_property
    def epsilon(self):
        return find_epsilon(self.phi, self.p, self.d)

    def with_(self, **kw):
        base = dict(
            s=self.s,
            p=self.p,
            q=self.q,
            phi=self.phi,
            enforce_gp=self.enforce_gp,
            enforce_epsilon=self.enforce_epsilon,
            sum_from_zero=self.sum_from_zero,
        )
        base.update(kw)
        return SpaceParams(**base)

    def to_json(self):
        return {"s": self.s, "p": self.p, "q": _q_json(self.q), "phi": self.phi.to_json()}


def _q_json(q):
    return "inf" if math.isinf(q) else q


@dataclass
class NormResult:
    value: float
    maximizing_cube: DyadicCube | None = None
    per_level_profile: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "value": self.value,
            "maximizing_cube": None if self.maximizing_cube is None else self.maximizing_cube.to_json(),
            "per_level_profile": {str(k): v for k, v in sorted(self.per_level_profile.items())},
        }


def _finish(level_values, detail):
    """level_values: dict level -> array of per-cube values."""
    best = -1.0
    cube = None
    profile = {}
    for L in sorted(level_values):
        arr = level_values[L]
        i = int(np.argmax(arr))
        v = float(arr.reshape(-1)[i])
        profile[L] = v
        if v > best:
            best = v
            cube = DyadicCube(L, np.unravel_index(i, arr.shape))
    res = NormResult(max(best, 0.0), cube, profile)
    return res if detail else res.value


def _phi_at_level(phi, L):
    return evaluate(phi, 2.0 ** (-L))


def _start(L, params):
    return 0 if params.sum_from_zero else max(L, 0)


def _arrays_of(G, grid=None):
    if isinstance(G, FieldSequence):
        return G.grid, [np.abs(f.values) for f in G.fields]
    if grid is None:
        raise ArgumentError("grid required for raw arrays")
    return grid, [np.abs(np.asarray(a)) for a in G]


def _check_levels(grid, J):
    if J > grid.n:
        raise ArgumentError(f"sequence has levels up to {J} but the grid resolves only up to n={grid.n}")


# ---------------------------------------------------------------------------
# mixed norms of sequences of functions

def mixed_norm_lq_lp(G, params: SpaceParams, detail=False, grid=None):
    """sup_P phi(l(P))^-1 ( sum_{j >= j_P v 0} ||g_j||_{L^p(P)}^q )^(1/q)."""
    grid, arrs = _arrays_of(G, grid)
    if not arrs:
        return NormResult(0.0) if detail else 0.0
    J = len(arrs) - 1
    _check_levels(grid, J)
    p, q = params.p, params.q
    levels = range(-grid.m, J + 1)
    # sums[j][L] = h^d * sum_{x in P} |g_j|^p for every level-L cube P, L <= j (or all L)
    sums = []
    for j, a in enumerate(arrs):
        top = J if params.sum_from_zero else j
        per = {}
        cur = level_sums(a**p, grid, top)
        per[top] = cur
        for L in range(top - 1, -grid.m - 1, -1):
            cur = coarsen(cur, 2)
            per[L] = cur
        sums.append(per)
    out = {}
    for L in levels:
        js = range(_start(L, params), J + 1)
        shape = (grid.cells_per_axis(L),) * grid.d
        if math.isinf(q):
            acc = np.zeros(shape)
            for j in js:
                acc = np.maximum(acc, sums[j][L] ** (1.0 / p))
            val = acc
        else:
            acc = np.zeros(shape)
            for j in js:
                acc = acc + sums[j][L] ** (q / p)
            val = acc ** (1.0 / q)
        out[L] = val / _phi_at_level(params.phi, L)
    return _finish(out, detail)


def _require_epsilon(params: SpaceParams):
    if math.isinf(params.q) or not params.enforce_epsilon:
        return
    if params.epsilon is None:
        raise PreconditionError(EPSILON_MESSAGE)


def mixed_norm_lp_lq(G, params: SpaceParams, detail=False, grid=None):
    """sup_P phi(l(P))^-1 ( int_P ( sum_{j >= j_P v 0} |g_j|^q )^(p/q) )^(1/p)."""
    _require_epsilon(params)
    grid, arrs = _arrays_of(G, grid)
    if not arrs:
        return NormResult(0.0) if detail else 0.0
    J = len(arrs) - 1
    _check_levels(grid, J)
    p, q = params.p, params.q
    # suffix[k] = sum_{j >= k} |g_j|^q  (or max for q = inf)
    suffix = [None] * (J + 2)
    suffix[J + 1] = np.zeros(grid.shape)
    for k in range(J, -1, -1):
        if math.isinf(q):
            suffix[k] = np.maximum(suffix[k + 1], arrs[k])
        else:
            suffix[k] = suffix[k + 1] + arrs[k] ** q
    out = {}
    inner_cache = {}
    for L in range(-grid.m, J + 1):
        k = _start(L, params)
        if k not in inner_cache:
            inner_cache[k] = suffix[k] ** p if math.isinf(q) else suffix[k] ** (p / q)
        out[L] = level_sums(inner_cache[k], grid, L) ** (1.0 / p) / _phi_at_level(params.phi, L)
    return _finish(out, detail)


# ---------------------------------------------------------------------------
# function-space norms

def weighted_blocks(f: SampledField, rou: ResolutionOfUnity, s: float) -> FieldSequence:
    b = blocks(f, rou)
    return FieldSequence(f.grid, tuple(SampledField(f.grid, 2.0 ** (j * s) * x.values) for j, x in enumerate(b)))


def besov_norm(f: SampledField, rou: ResolutionOfUnity, params: SpaceParams, detail=False):
    return mixed_norm_lq_lp(weighted_blocks(f, rou, params.s), params, detail)


def tl_norm(f: SampledField, rou: ResolutionOfUnity, params: SpaceParams, detail=False):
    _require_epsilon(params)
    return mixed_norm_lp_lq(weighted_blocks(f, rou, params.s), params, detail)


def space_norm(space: str, f: SampledField, rou: ResolutionOfUnity, params: SpaceParams, detail=False):
    if space == "B":
        return besov_norm(f, rou, params, detail)
    if space == "F":
        return tl_norm(f, rou, params, detail)
    raise ArgumentError(f"unknown function space {space!r}")


def lp_phi_norm(f: SampledField, p: float, phi: PhiSpec, detail=False):
    """sup over cubes with |P| >= 1 of phi(l(P))^-1 ||f||_{L^p(P)}."""
    if not p > 0:
        raise ArgumentError("p must be positive")
    grid = f.grid
    a = np.abs(f.values) ** p
    out = {}
    for L in range(-grid.m, 1):
        out[L] = level_sums(a, grid, L) ** (1.0 / p) / _phi_at_level(phi, L)
    return _finish(out, detail)


def besov_infty_norm(f: SampledField, rou: ResolutionOfUnity, s: float) -> float:
    """Classical sup_j 2^(js) max_x |block_j f|."""
    return max(2.0 ** (j * s) * float(np.max(np.abs(b.values))) for j, b in enumerate(blocks(f, rou)))


def besov_0_infty_1(f: SampledField, rou: ResolutionOfUnity) -> float:
    """Classical sum_j max_x |block_j f| (smoothness 0, p = inf, q = 1)."""
    return float(sum(np.max(np.abs(b.values)) for b in blocks(f, rou)))


# ---------------------------------------------------------------------------
# coefficient sequences

class CoefficientSequence:
    """Coefficients lambda_{j,k} for levels 0..J_max stored as dense per-level arrays.

    Level j has 2^(j+m) cubes per axis.  Iteration yields nonzero entries in
    lexicographic (j, k) order.
    """

    def __init__(self, grid: TorusGrid, levels):
        self.grid = grid
        arrs = []
        for j, a in enumerate(levels):
            a = np.asarray(a, dtype=complex)
            shape = (grid.cells_per_axis(j),) * grid.d
            if a.shape != shape:
                raise ArgumentError(f"level {j} has shape {a.shape}, expected {shape}")
            arrs.append(a)
        if len(arrs) - 1 > grid.n:
            raise ArgumentError("coefficient levels beyond the grid resolution")
        self.levels = arrs

    @classmethod
    def zeros(cls, grid: TorusGrid, J_max: int):
        return cls(grid, [np.zeros((grid.cells_per_axis(j),) * grid.d, dtype=complex) for j in range(J_max + 1)])

    @classmethod
    def from_dict(cls, grid: TorusGrid, J_max: int, mapping):
        out = cls.zeros(grid, J_max)
        for (j, k), v in mapping.items():
            out[j, k] = v
        return out

    @property
    def J_max(self):
        return len(self.levels) - 1

    def _key(self, key):
        j, k = key
        k = (k,) if np.ndim(k) == 0 else tuple(int(x) for x in k)
        if not 0 <= j <= self.J_max:
            raise ArgumentError(f"level {j} outside [0, {self.J_max}]")
        M = self.grid.cells_per_axis(j)
        if len(k) != self.grid.d or any(not 0 <= x < M for x in k):
            raise ArgumentError(f"offset {k} outside level {j}")
        return j, k

    def __getitem__(self, key):
        j, k = self._key(key)
        return complex(self.levels[j][k])

    def __setitem__(self, key, value):
        j, k = self._key(key)
        self.levels[j][k] = value

    def items(self):
        for j, a in enumerate(self.levels):
            for k in zip(*np.nonzero(a)):
                yield (j, tuple(int(x) for x in k)), complex(a[k])

    def nnz(self):
        return int(sum(np.count_nonzero(a) for a in self.levels))

    def copy(self):
        return CoefficientSequence(self.grid, [a.copy() for a in self.levels])

    def __mul__(self, c):
        return CoefficientSequence(self.grid, [a * c for a in self.levels])

    __rmul__ = __mul__

    def __add__(self, other):
        J = max(self.J_max, other.J_max)
        a = self.padded(J)
        b = other.padded(J)
        return CoefficientSequence(self.grid, [x + y for x, y in zip(a.levels, b.levels)])

    def padded(self, J):
        if J <= self.J_max:
            return self
        extra = [np.zeros((self.grid.cells_per_axis(j),) * self.grid.d, dtype=complex) for j in range(self.J_max + 1, J + 1)]
        return CoefficientSequence(self.grid, self.levels + extra)

    def to_json(self):
        return [{"j": j, "m": list(k), "re": v.real, "im": v.imag} for (j, k), v in self.items()]

    @classmethod
    def from_json(cls, grid: TorusGrid, obj, J_max=None):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            entries = [(int(e["j"]), tuple(int(x) for x in e["m"]), complex(float(e["re"]), float(e.get("im", 0.0)))) for e in obj]
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"malformed coefficient JSON: {exc}") from exc
        top = max([e[0] for e in entries], default=0)
        out = cls.zeros(grid, top if J_max is None else J_max)
        for j, k, v in entries:
            out[j, k] = v
        return out


def seq_b_norm(lam: CoefficientSequence, params: SpaceParams, detail=False):
    """sup_P phi^-1 ( sum_j [ sum_{Q_{j,k} in P} (2^{j(s-d/p)} |lambda|)^p ]^(q/p) )^(1/q)."""
    grid = lam.grid
    p, q, s, d = params.p, params.q, params.s, grid.d
    J = lam.J_max
    A = [(2.0 ** (j * (s - d / p)) * np.abs(a)) ** p for j, a in enumerate(lam.levels)]
    out = {}
    for L in range(-grid.m, J + 1):
        shape = (grid.cells_per_axis(L),) * d
        acc = np.zeros(shape)
        for j in range(_start(L, params), J + 1):
            if j < L:
                continue
            part = coarsen(A[j], 2 ** (j - L))
            acc = np.maximum(acc, part ** (1.0 / p)) if math.isinf(q) else acc + part ** (q / p)
        val = acc if math.isinf(q) else acc ** (1.0 / q)
        out[L] = val / _phi_at_level(params.phi, L)
    return _finish(out, detail)


def seq_f_norm(lam: CoefficientSequence, params: SpaceParams, detail=False):
    """sup_P phi^-1 ( int_P [ sum_j sum_{Q in P} (2^{js} |lambda_Q| chi_Q)^q ]^(p/q) )^(1/p).

    The integrand is constant on the cubes of level J_max, so the integral is
    an exact finite sum.
    """
    _require_epsilon(params)
    grid = lam.grid
    p, q, s, d = params.p, params.q, params.s, grid.d
    J = lam.J_max
    fine = [refine(2.0 ** (j * s) * np.abs(a), 2 ** (J - j)) for j, a in enumerate(lam.levels)]
    suffix = [None] * (J + 2)
    suffix[J + 1] = np.zeros_like(fine[0]) if fine else None
    for k in range(J, -1, -1):
        suffix[k] = np.maximum(suffix[k + 1], fine[k]) if math.isinf(q) else suffix[k + 1] + fine[k] ** q
    cell = 2.0 ** (-J * d)
    out = {}
    for L in range(-grid.m, J + 1):
        k = _start(L, params)
        inner = suffix[k] ** p if math.isinf(q) else suffix[k] ** (p / q)
        out[L] = (coarsen(inner, 2 ** (J - L)) * cell) ** (1.0 / p) / _phi_at_level(params.phi, L)
    return _finish(out, detail)


def sequence_norm(space: str, lam: CoefficientSequence, params: SpaceParams, detail=False):
    if space == "b":
        return seq_b_norm(lam, params, detail)
    if space == "f":
        return seq_f_norm(lam, params, detail)
    raise ArgumentError(f"unknown sequence space {space!r}")


def periodic_index_distance(M: int, d: int):
    """|k|_periodic for every offset k in the M^d index torus (shape (M,)*d)."""
    idx = np.arange(M)
    per = np.minimum(idx, M - idx).astype(float)
    sq = np.zeros((M,) * d)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = M
        sq = sq + (per**2).reshape(shape)
    return np.sqrt(sq)


def lambda_star(lam: CoefficientSequence, r: float, delta: float) -> CoefficientSequence:
    """Same-level smoothing (sum_R |lambda_R|^r (1 + |k_R - k_Q|)^-delta)^(1/r).

    Distances use lower-corner anchors, i.e. index differences, measured on
    the periodic index torus.  For r = inf the sum becomes
    sup_R |lambda_R| (1 + |k_R - k_Q|)^-delta.
    """
    if not r > 0:
        raise ArgumentError("r must be positive")
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    d = lam.grid.d
    out = []
    for a in lam.levels:
        absa = np.abs(a)
        if not np.any(absa):
            out.append(np.zeros_like(a))
            continue
        M = a.shape[0]
        w = (1.0 + periodic_index_distance(M, d)) ** (-delta)
        axes = tuple(range(d))
        if math.isinf(r):
            acc = np.zeros_like(absa)
            for off in np.ndindex(*a.shape):
                np.maximum(acc, np.roll(absa, off, axis=axes) * w[off], out=acc)
            out.append(acc.astype(complex))
        else:
            base = absa**r
            acc = np.zeros_like(absa)
            for off in np.ndindex(*a.shape):
                acc += w[off] * np.roll(base, off, axis=axes)
            out.append((acc ** (1.0 / r)).astype(complex))
    return CoefficientSequence(lam.grid, out)
