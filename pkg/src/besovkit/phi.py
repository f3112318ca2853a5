"""Weight functions phi and the conditions they are tested against.

A weight is admissible for integrability ``p`` in dimension ``d`` when it is
nondecreasing and ``t**(-d/p) * phi(t)`` is nonincreasing.  Symbolic variants
get exact analytic decisions; tabulated data is decided on a geometric grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, DomainError, RangeError

VARIANTS = ("constant", "power", "piecewise_power", "power_log", "tabulated")

DEFAULT_GRID = np.geomspace(1e-6, 1e6, 601)
MONOTONE_RTOL = 1e-12
EPS_SLACK = 1.0 + 1e-9


@dataclass(frozen=True)
class PhiSpec:
    """A weight function together with its reference dimension and exponent.

    ``params`` depends on ``variant``:

    * ``constant``: ``c``
    * ``power``: ``u`` and optional ``scale``
    * ``piecewise_power``: ``u``, ``v`` (t^(d/u) below 1, t^(d/v) above)
    * ``power_log``: ``a``, ``L`` and exponent ``b`` (defaults to d/p)
    * ``tabulated``: ``knots``, ``values``, ``extrapolate``
    """

    variant: str
    params: dict = field(default_factory=dict)
    d: int = 1
    p: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown phi variant {self.variant!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentError("d must be a positive integer")
        if not self.p > 0:
            raise ArgumentError("p must be positive")
        prm = self.params
        if self.variant == "constant":
            if not prm.get("c", 0) > 0:
                raise ArgumentError("constant phi needs c > 0")
        elif self.variant == "power":
            if "u" not in prm:
                raise ArgumentError("power phi needs exponent u")
        elif self.variant == "piecewise_power":
            if not (prm.get("u", 0) > 0 and prm.get("v", 0) > 0):
                raise ArgumentError("piecewise_power needs u > 0 and v > 0")
        elif self.variant == "power_log":
            if not prm.get("L", 0) > 1:
                raise ArgumentError("power_log needs shift L > 1")
            if "a" not in prm:
                raise ArgumentError("power_log needs log exponent a")
        elif self.variant == "tabulated":
            knots = np.asarray(prm.get("knots", []), dtype=float)
            values = np.asarray(prm.get("values", []), dtype=float)
            if knots.ndim != 1 or knots.size < 2 or knots.shape != values.shape:
                raise ArgumentError("tabulated phi needs matching knots/values (>= 2)")
            if np.any(knots <= 0) or np.any(np.diff(knots) <= 0):
                raise ArgumentError("tabulated knots must be positive and strictly increasing")
            if np.any(values <= 0) or not np.all(np.isfinite(values)):
                raise ArgumentError("tabulated values must be finite and positive")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c=1.0, d=1, p=1.0):
        return cls("constant", {"c": float(c)}, d, p)

    @classmethod
    def power(cls, u, d=1, p=1.0, scale=1.0):
        prm = {"u": float(u)}
        if scale != 1.0:
            prm["scale"] = float(scale)
        return cls("power", prm, d, p)

    @classmethod
    def piecewise_power(cls, u, v, d=1, p=1.0):
        return cls("piecewise_power", {"u": float(u), "v": float(v)}, d, p)

    @classmethod
    def power_log(cls, a, L, d=1, p=1.0, b=None):
        b = d / p if b is None else b
        return cls("power_log", {"a": float(a), "L": float(L), "b": float(b)}, d, p)

    @classmethod
    def tabulated(cls, knots, values, d=1, p=1.0, extrapolate=False):
        return cls(
            "tabulated",
            {
                "knots": [float(x) for x in knots],
                "values": [float(x) for x in values],
                "extrapolate": bool(extrapolate),
            },
            d,
            p,
        )

    # evaluation ---------------------------------------------------------
    def __call__(self, t):
        return evaluate(self, t)

    def log_eval(self, t):
        return log_evaluate(self, t)

    def at(self, p=None, d=None):
        """Same function, different reference (p, d)."""
        return replace(self, p=self.p if p is None else p, d=self.d if d is None else d)

    # serialization ------------------------------------------------------
    def to_json(self):
        return {"variant": self.variant, "params": dict(self.params), "d": int(self.d), "p": float(self.p)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            variant = obj["variant"]
            params = dict(obj.get("params", {}))
            d = int(obj.get("d", 1))
            p = float(obj.get("p", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"malformed phi JSON: {exc}") from exc
        if variant == "power_log" and "b" not in params:
            params["b"] = d / p
        return cls(variant, params, d, p)


def _as_positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("phi is only defined for t > 0")
    return t


def log_evaluate(phi: PhiSpec, t):
    """Natural logarithm of phi(t), vectorized."""
    t = _as_positive(t)
    prm = phi.params
    lt = np.log(t)
    v = phi.variant
    if v == "constant":
        out = np.full_like(lt, math.log(prm["c"]))
    elif v == "power":
        out = prm["u"] * lt + math.log(prm.get("scale", 1.0))
    elif v == "piecewise_power":
        d = phi.d
        out = np.where(t <= 1.0, (d / prm["u"]) * lt, (d / prm["v"]) * lt)
    elif v == "power_log":
        b = prm.get("b", phi.d / phi.p)
        out = b * lt + prm["a"] * np.log(np.log(prm["L"] + t))
    else:
        knots = np.log(np.asarray(prm["knots"]))
        vals = np.log(np.asarray(prm["values"]))
        lo, hi = knots[0], knots[-1]
        # small relative slack so that knots themselves never trip the range check
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        outside = (lt < lo - tol) | (lt > hi + tol)
        if np.any(outside) and not prm.get("extrapolate", False):
            raise RangeError(
                f"t outside tabulated range [{prm['knots'][0]}, {prm['knots'][-1]}] "
                "and extrapolation is disabled"
            )
        out = np.interp(lt, knots, vals)
        if prm.get("extrapolate", False):
            s_lo = (vals[1] - vals[0]) / (knots[1] - knots[0])
            s_hi = (vals[-1] - vals[-2]) / (knots[-1] - knots[-2])
            out = np.where(lt < lo, vals[0] + s_lo * (lt - lo), out)
            out = np.where(lt > hi, vals[-1] + s_hi * (lt - hi), out)
    return out


def evaluate(phi: PhiSpec, t):
    """phi(t); returns a float for scalar input."""
    scalar = np.ndim(t) == 0
    t = _as_positive(t)
    v = phi.variant
    prm = phi.params
    if v == "constant":
        out = np.full_like(t, prm["c"])
    elif v == "power":
        out = prm.get("scale", 1.0) * t ** prm["u"]
    elif v == "piecewise_power":
        d = phi.d
        out = np.where(t <= 1.0, t ** (d / prm["u"]), t ** (d / prm["v"]))
    elif v == "power_log":
        b = prm.get("b", phi.d / phi.p)
        out = t**b * np.log(prm["L"] + t) ** prm["a"]
    else:
        out = np.exp(log_evaluate(phi, t))
    return float(out) if scalar else out


def normalize(phi: PhiSpec) -> PhiSpec:
    """Rescale so that phi(1) = 1 (returned as a tabulated-free symbolic spec when possible)."""
    c = evaluate(phi, 1.0)
    return scale(phi, 1.0 / c)


def scale(phi: PhiSpec, factor: float) -> PhiSpec:
    prm = dict(phi.params)
    if phi.variant == "constant":
        prm["c"] = prm["c"] * factor
        return replace(phi, params=prm)
    if phi.variant == "power":
        prm["scale"] = prm.get("scale", 1.0) * factor
        return replace(phi, params=prm)
    if phi.variant == "tabulated":
        prm["values"] = [x * factor for x in prm["values"]]
        return replace(phi, params=prm)
    # piecewise / power_log have no free scale; fall back to a fine table
    knots = np.geomspace(1e-8, 1e8, 2001)
    return PhiSpec.tabulated(knots, evaluate(phi, knots) * factor, phi.d, phi.p, extrapolate=True)


def times_power(phi: PhiSpec, e: float, p=None) -> PhiSpec:
    """The weight t -> phi(t) * t**e, re-expressed in the same family."""
    p = phi.p if p is None else p
    d = phi.d
    prm = dict(phi.params)
    v = phi.variant
    if v == "constant":
        return PhiSpec.power(e, d, p, scale=prm["c"])
    if v == "power":
        return PhiSpec.power(prm["u"] + e, d, p, scale=prm.get("scale", 1.0))
    if v == "piecewise_power":
        eu = d / prm["u"] + e
        ev = d / prm["v"] + e
        if eu <= 0 or ev <= 0:
            raise ArgumentError("resulting piecewise exponents must stay positive")
        return PhiSpec.piecewise_power(d / eu, d / ev, d, p)
    if v == "power_log":
        return PhiSpec.power_log(prm["a"], prm["L"], d, p, b=prm.get("b", d / phi.p) + e)
    knots = np.asarray(prm["knots"])
    return PhiSpec.tabulated(knots, np.asarray(prm["values"]) * knots**e, d, p, prm.get("extrapolate", False))


# ---------------------------------------------------------------------------
# grids

def validate_grid(grid, name="t_grid"):
    g = np.asarray(DEFAULT_GRID if grid is None else grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ArgumentError(f"{name} needs at least 2 points")
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        raise ArgumentError(f"{name} must be positive and strictly increasing")
    if g[0] > 1e-3 or g[-1] < 1e3:
        raise ArgumentError(f"{name} must span at least 6 decades around 1 (from <= 1e-3 to >= 1e3)")
    return g


def _restrict_to_table(phi, grid):
    """For non-extrapolating tables, check on grid points inside the table plus the knots."""
    if phi.variant != "tabulated" or phi.params.get("extrapolate", False):
        return grid
    knots = np.asarray(phi.params["knots"])
    inside = grid[(grid >= knots[0]) & (grid <= knots[-1])]
    return np.union1d(inside, knots)


# ---------------------------------------------------------------------------
# membership

@dataclass
class MembershipResult:
    member: bool
    witness: tuple | None = None
    method: str = "grid"

    def to_json(self):
        return {"member": self.member, "witness": None if self.witness is None else list(self.witness), "method": self.method}


def _halfline_min(alpha, beta, L):
    """Decide g(t) = alpha*(L+t)*log(L+t) + beta*t >= 0 for all t > 0.

    Returns (ok, t_star) where t_star locates the minimum when ok is False.
    """
    if alpha < 0:
        # t log t dominates and g -> -inf
        t = max(1.0, math.exp(abs(beta / alpha) + 2.0)) * 10
        return False, t
    if alpha == 0:
        return beta >= 0, 1.0
    expo = -beta / alpha - 1.0
    if expo > 700:
        return False, math.inf
    E = math.exp(expo)
    t_star = E - L
    if t_star <= 0:
        return True, None
    return (-alpha * E - beta * L) >= 0, t_star


def _witness_near(t_star):
    # the minimum of g sits where the log-derivative has the wrong sign
    return (t_star, t_star * 1.001)


def analytic_membership(phi: PhiSpec, p: float, d: int):
    """Exact decision for symbolic variants; None for tabulated data."""
    prm = phi.params
    v = phi.variant
    if v == "constant":
        return MembershipResult(True, None, "analytic")
    if v == "power":
        u = prm["u"]
        ok = 0 <= u <= d / p
        return MembershipResult(ok, None if ok else (1.0, 2.0), "analytic")
    if v == "piecewise_power":
        ok = d / prm["u"] <= d / p and d / prm["v"] <= d / p
        if ok:
            return MembershipResult(True, None, "analytic")
        w = (0.5, 1.0) if d / prm["u"] > d / p else (1.0, 2.0)
        return MembershipResult(False, w, "analytic")
    if v == "power_log":
        a, L, b = prm["a"], prm["L"], prm.get("b", phi.d / phi.p)
        ok1, t1 = _halfline_min(b, a, L)
        if not ok1:
            return MembershipResult(False, _witness_near(t1), "analytic")
        ok2, t2 = _halfline_min(d / p - b, -a, L)
        if not ok2:
            return MembershipResult(False, _witness_near(t2), "analytic")
        return MembershipResult(True, None, "analytic")
    return None


def grid_membership(phi: PhiSpec, p: float, d: int, t_grid=None) -> MembershipResult:
    g = _restrict_to_table(phi, validate_grid(t_grid))
    lphi = log_evaluate(phi, g)
    tol = math.log1p(MONOTONE_RTOL)
    inc = np.diff(lphi)
    bad = np.nonzero(inc < -tol)[0]
    if bad.size:
        i = int(bad[0])
        return MembershipResult(False, (float(g[i]), float(g[i + 1])), "grid")
    lpsi = lphi - (d / p) * np.log(g)
    bad = np.nonzero(np.diff(lpsi) > tol)[0]
    if bad.size:
        i = int(bad[0])
        return MembershipResult(False, (float(g[i]), float(g[i + 1])), "grid")
    return MembershipResult(True, None, "grid")


def check_gp_membership(phi: PhiSpec, p=None, d=None, t_grid=None, analytic=True) -> MembershipResult:
    """Decide whether phi belongs to the admissible class at (p, d).

    The witness, when present, is a pair ``(t, s)`` with ``t < s`` at which
    either monotonicity condition fails.
    """
    p = phi.p if p is None else p
    d = phi.d if d is None else d
    if not p > 0:
        raise ArgumentError("p must be positive")
    validate_grid(t_grid)
    if analytic:
        res = analytic_membership(phi, p, d)
        if res is not None:
            if not res.member:
                # prefer a concrete grid witness if the grid sees the failure
                gres = grid_membership(phi, p, d, t_grid)
                if not gres.member:
                    res.witness = gres.witness
            return res
    return grid_membership(phi, p, d, t_grid)


def smallest_powerlog_shift(a: float, p: float, d: int, t_grid=None, hi=1e12, tol=1e-10):
    """Smallest shift L > 1 for which t^(d/p) log(L+t)^a passes the grid check.

    Bisection in log L; the grid decision is monotone in L for a <= 0.
    """
    def ok(L):
        return grid_membership(PhiSpec.power_log(a, L, d, p), p, d, t_grid).member

    lo_l, hi_l = math.log(1.0 + 1e-12), math.log(hi)
    if ok(math.exp(lo_l)):
        return math.exp(lo_l)
    if not ok(hi):
        return None
    while hi_l - lo_l > tol:
        mid = 0.5 * (lo_l + hi_l)
        if ok(math.exp(mid)):
            hi_l = mid
        else:
            lo_l = mid
    return math.exp(hi_l)


def log_decay_example(u: float, d=1, p=1.0, knots=None) -> PhiSpec:
    """Tabulated samples of t^u / log(e + t), a weight that is not admissible for small u."""
    knots = DEFAULT_GRID if knots is None else np.asarray(knots, dtype=float)
    return PhiSpec.tabulated(knots, knots**u / np.log(math.e + knots), d, p)


# ---------------------------------------------------------------------------
# epsilon condition

@dataclass
class EpsilonResult:
    holds: bool
    worst_ratio: float
    witness: tuple | None = None
    method: str = "grid"


def _power_exponents(phi: PhiSpec, d):
    """Exponents of phi on (0,1] and (1,inf) for power-type variants, else None."""
    prm = phi.params
    if phi.variant == "constant":
        return 0.0, 0.0
    if phi.variant == "power":
        return prm["u"], prm["u"]
    if phi.variant == "piecewise_power":
        return phi.d / prm["u"], phi.d / prm["v"]
    return None


def check_epsilon_condition(phi: PhiSpec, p=None, d=None, eps=None, grid=None, slack=1.0) -> EpsilonResult:
    """Test t^(eps-d/p) phi(t) <= slack * r^(eps-d/p) phi(r) for grid pairs t >= r."""
    p = phi.p if p is None else p
    d = phi.d if d is None else d
    if eps is None or not eps > 0:
        raise ArgumentError("eps must be positive")
    if slack < 1:
        raise ArgumentError("slack must be >= 1")
    g = _restrict_to_table(phi, validate_grid(grid))
    lpsi = (eps - d / p) * np.log(g) + log_evaluate(phi, g)
    run_min = np.minimum.accumulate(lpsi)
    excess = lpsi - run_min
    i = int(np.argmax(excess))
    worst = float(np.exp(excess[i]))
    witness = None
    if excess[i] > 0:
        r_idx = int(np.argmin(lpsi[: i + 1]))
        witness = (float(g[i]), float(g[r_idx]))
    exps = _power_exponents(phi, d)
    if exps is not None:
        holds = all(e + eps <= d / p for e in exps)
        return EpsilonResult(holds, worst, None if holds else witness, "analytic")
    holds = worst <= slack * (1 + 1e-15)
    return EpsilonResult(holds, worst, None if holds else witness, "grid")


def find_epsilon(phi: PhiSpec, p=None, d=None, candidates=None, grid=None, slack=EPS_SLACK):
    """Largest candidate eps for which the epsilon condition holds, or None."""
    p = phi.p if p is None else p
    d = phi.d if d is None else d
    if candidates is None:
        candidates = np.linspace(0.0, d / p, 1001)[1:]
    cands = np.sort(np.asarray(candidates, dtype=float))
    cands = cands[cands > 0]
    if cands.size == 0:
        return None

    def ok(e):
        return check_epsilon_condition(phi, p, d, float(e), grid, slack).holds

    if not ok(cands[0]):
        return None
    lo, hi = 0, cands.size - 1
    if ok(cands[hi]):
        return float(cands[hi])
    # invariant: ok(lo), not ok(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(cands[mid]):
            lo = mid
        else:
            hi = mid
    return float(cands[lo])


# ---------------------------------------------------------------------------
# integral conditions

@dataclass
class IntegralResult:
    holds: bool
    estimated_C: float
    diagnostic: str = ""


def _integral_constant(phi, p, d, weight, kappa, r_grid, T, N):
    """max_r of int_r^T (phi(t)/phi(r))^w (t/r)^kappa dt/t, plus a power-law tail."""
    lr = np.log(r_grid)[:, None]
    lT = math.log(T)
    x = np.linspace(0.0, 1.0, N + 1)[None, :]
    s = lr + (lT - lr) * x
    ds = (lT - lr)[:, 0] / N
    lphi_r = log_evaluate(phi, r_grid)[:, None]
    lg = weight * (log_evaluate(phi, np.exp(s)) - lphi_r) + kappa * (s - lr)
    g = np.exp(lg)
    body = ds * (g.sum(axis=1) - 0.5 * (g[:, 0] + g[:, -1]))
    slope = (lg[:, -1] - lg[:, -2]) / ds
    if np.any(slope >= -1e-9):
        return math.inf
    tail = g[:, -1] / (-slope)
    return float(np.max(body + tail))


def check_integral_condition(
    phi: PhiSpec,
    p=None,
    d=None,
    variant="nintc",
    *,
    eps=None,
    u=None,
    r_grid=None,
    cutoff=None,
    panels=2000,
) -> IntegralResult:
    """Numerically bound the tail integral conditions.

    ``nintc``: int_r^inf phi(t) t^(-d/p-1) dt <= C phi(r) r^(-d/p)
    ``nintc1``: same with an extra t^eps (needs ``eps``)
    ``nintc2``: phi^u with t^(-(d/p)u-1) (needs ``u``)

    The integral is computed in log t with a trapezoid rule up to ``cutoff``
    and closed with the power-law tail matching the local log-slope.  The
    estimate must agree within 1% when both cutoff and panel count double.
    """
    p = phi.p if p is None else p
    d = phi.d if d is None else d
    if variant == "nintc":
        weight, kappa = 1.0, -d / p
    elif variant == "nintc1":
        if eps is None or not eps > 0:
            raise ArgumentError("nintc1 needs eps > 0")
        weight, kappa = 1.0, eps - d / p
    elif variant == "nintc2":
        if u is None or not u > 0:
            raise ArgumentError("nintc2 needs u > 0")
        weight, kappa = float(u), -(d / p) * u
    else:
        raise ArgumentError(f"unknown integral condition {variant!r}")
    r = np.geomspace(1e-3, 1e3, 61) if r_grid is None else np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(r <= 0):
        raise ArgumentError("r_grid must be a nonempty array of positive reals")
    T = 1e4 * float(r.max()) if cutoff is None else float(cutoff)
    if T < 1e4 * float(r.max()):
        raise ArgumentError("cutoff must be at least 1e4 * max(r_grid)")
    c1 = _integral_constant(phi, p, d, weight, kappa, r, T, panels)
    c2 = _integral_constant(phi, p, d, weight, kappa, r, 2 * T, 2 * panels)
    if not (math.isfinite(c1) and math.isfinite(c2)):
        return IntegralResult(False, math.inf, "integrand does not decay faster than 1/t")
    if c2 > 10 * c1:
        return IntegralResult(False, c2, "estimate grows more than 10x under cutoff doubling")
    stable = abs(c2 - c1) <= 0.01 * abs(c2)
    return IntegralResult(stable, c2, "" if stable else "estimate not stable under doubling")


# ---------------------------------------------------------------------------
# catalog

def catalog(p: float, d: int = 1) -> dict:
    """Standard weights used across the test matrix."""
    L = smallest_powerlog_shift(-1.0, p, d)
    L = max(math.e, 2.0 * L) if L is not None else 1e6
    return {
        "one": PhiSpec.constant(1.0, d, p),
        "half_power": PhiSpec.power(d / (2 * p), d, p),
        "critical_power": PhiSpec.power(d / p, d, p),
        "piecewise": PhiSpec.piecewise_power(2 * p, 4 * p / 3, d, p),
        "power_log": PhiSpec.power_log(-1.0, L, d, p),
    }
