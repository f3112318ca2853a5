"""Command-line entry point: ``besovkit <subcommand> ...``.

Exit codes: 0 success, 1 failed verification, 2 bad arguments or input
files, 3 unmet preconditions.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .analysis import ResolutionOfUnity, blocks, build_resolution, hl_maximal, lift, peetre_maximal, powered_maximal
from .atoms import Atom, AtomSpec, band_excess, calderon_pair, decompose_atomic, make_atom, synthesize, validate_atom
from .errors import ArgumentError, BesovkitError
from .harness import FAMILY_KINDS, SUITES, SuiteConfig, TestFamily, reports_json, run_suite, summarize
from .lattice import DyadicCube, SampledField, TorusGrid, atomic_write_text, read_ffld, write_ffld
from .phi import PhiSpec, check_epsilon_condition, check_gp_membership, find_epsilon
from .spaces import (
    CoefficientSequence,
    SpaceParams,
    besov_infty_norm,
    lp_phi_norm,
    sequence_norm,
    space_norm,
)

DEFAULT_GRID = (1, 0, 9)
DEFAULT_J_MAX = 7


# ---------------------------------------------------------------------------
# argument helpers

def _grid(text):
    try:
        d, m, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be three integers d,m,n")
    return d, m, n


def _float(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _ints(text):
    return tuple(int(x) for x in text.split(",")) if text else ()


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: invalid JSON ({exc})") from exc


def _load_phi(path, p=None, d=None):
    phi = PhiSpec.from_json(_load_json(path))
    return phi.at(p=p, d=d) if (p is not None or d is not None) else phi


def _load_field(path):
    try:
        return read_ffld(path)
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror}") from exc


def _write_field(path, f):
    write_ffld(path, f)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _emit(args, payload, summary):
    text = json.dumps(_jsonable(payload), indent=1, sort_keys=True)
    if getattr(args, "out", None):
        atomic_write_text(args.out, text + "\n")
    else:
        print(text)
    print(summary)


def _grid_of(args):
    return TorusGrid(*(args.grid or DEFAULT_GRID))


def _J(args, grid):
    J = args.J_max if args.J_max is not None else min(DEFAULT_J_MAX, grid.n - 2)
    return J


def _rou(args, grid) -> ResolutionOfUnity:
    return build_resolution(grid, _J(args, grid), args.sharpness)


def _space_params(args, phi):
    return SpaceParams(args.s, args.p, args.q, phi, sum_from_zero=args.sum_from_zero)


# ---------------------------------------------------------------------------
# subcommands

def cmd_phi_check(args):
    phi = _load_phi(args.phi, args.p, args.d)
    mem = check_gp_membership(phi)
    eps = find_epsilon(phi) if mem.member else None
    payload = {
        "phi": phi.to_json(),
        "member": mem.member,
        "witness": None if mem.witness is None else list(mem.witness),
        "method": mem.method,
        "epsilon": eps,
    }
    if eps is None and mem.member:
        res = check_epsilon_condition(phi, eps=1e-3)
        payload["epsilon_witness"] = None if res.witness is None else list(res.witness)
    _emit(args, payload, f"phi-check: member={mem.member} epsilon={eps}")
    return 0


def _field_from_kind(args):
    grid = _grid_of(args)
    kind = args.kind
    if kind == "constant":
        return SampledField(grid, np.full(grid.shape, complex(args.value), dtype=complex))
    if kind == "mode":
        k = _ints(args.mode) or (0,) * grid.d
        if len(k) != grid.d:
            raise ArgumentError("--mode needs one integer per dimension")
        vals = np.ones(grid.shape, dtype=complex)
        x = grid.coordinates()
        for ax, kk in enumerate(k):
            shape = [1] * grid.d
            shape[ax] = grid.N
            vals = vals * np.exp(2j * np.pi * kk * x / grid.extent).reshape(shape)
        return SampledField(grid, complex(args.value) * vals)
    fam = TestFamily(kind, count=args.index + 1, seed=args.seed, grid=grid, J_max=_J(args, grid))
    member = fam.member(args.index)
    if isinstance(member, tuple):
        member = member[0]
    if isinstance(member, Atom):
        member = member.values
    if not isinstance(member, SampledField):
        raise ArgumentError(f"family {kind!r} does not produce fields")
    return member


def cmd_field(args):
    if args.action == "gen":
        if not args.out:
            raise ArgumentError("field gen needs --out")
        f = _field_from_kind(args)
        _write_field(args.out, f)
        print(f"field gen: {args.kind} on grid {f.grid.to_json()} -> {args.out}")
        return 0
    f = _load_field(args.field)
    if args.action == "info":
        J = min(_J(args, f.grid), f.grid.n - 2)
        payload = {
            "grid": f.grid.to_json(),
            "count": f.grid.size,
            "sup": f.sup(),
            "l2": float(np.sqrt(f.grid.cell_volume * np.sum(np.abs(f.values) ** 2))),
            "mean": [float(np.mean(f.values).real), float(np.mean(f.values).imag)],
            "real": bool(np.all(f.values.imag == 0)),
            "band_excess": band_excess(f, J),
            "J_max": J,
        }
        _emit(args, payload, f"field info: grid {f.grid.to_json()} sup={payload['sup']:.6g}")
        return 0
    # cat: one sample per line, "re,im"
    lines = "\n".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in f.flat) + "\n"
    if args.out:
        atomic_write_text(args.out, lines)
        print(f"field cat: {f.grid.size} samples -> {args.out}")
    else:
        sys.stdout.write(lines)
    return 0


def cmd_blocks(args):
    f = _load_field(args.field)
    rou = _rou(args, f.grid)
    seq = blocks(f, rou)
    paths = []
    for j, b in enumerate(seq):
        path = f"{args.prefix}_{j}.ffld"
        _write_field(path, b)
        paths.append(path)
    print(f"blocks: wrote {len(paths)} blocks j=0..{rou.J_max} with prefix {args.prefix}")
    return 0


def cmd_maximal(args):
    f = _load_field(args.field)
    levels = _ints(args.levels) or None
    if args.kind == "hl":
        g = hl_maximal(f, levels)
    elif args.kind == "powered":
        g = powered_maximal(f, args.eta, levels)
    else:
        if args.j is None:
            raise ArgumentError("peetre maximal needs --j")
        g = peetre_maximal(f, _rou(args, f.grid), args.j, args.a)
    _write_field(args.out, g)
    print(f"maximal: {args.kind} sup={g.sup():.6g} -> {args.out}")
    return 0


def cmd_lift(args):
    f = _load_field(args.field)
    g = lift(f, args.kappa)
    _write_field(args.out, g)
    print(f"lift: kappa={args.kappa} -> {args.out}")
    return 0


def cmd_norm(args):
    space = args.space
    if space in ("b", "f"):
        if not args.coeffs:
            raise ArgumentError(f"space {space} needs --coeffs")
        grid = _load_field(args.field).grid if args.field else _grid_of(args)
        lam = CoefficientSequence.from_json(grid, _load_json(args.coeffs), args.J_max)
        phi = _load_phi(args.phi, args.p, grid.d)
        res = sequence_norm(space, lam, _space_params(args, phi), detail=True)
    else:
        if not args.field:
            raise ArgumentError(f"space {space} needs --field")
        f = _load_field(args.field)
        if space == "BinftyInfty":
            res = {"value": besov_infty_norm(f, _rou(args, f.grid), args.s), "maximizing_cube": None, "per_level_profile": {}}
        else:
            phi = _load_phi(args.phi, args.p, f.grid.d)
            if space == "LpPhi":
                res = lp_phi_norm(f, args.p, phi, detail=True)
            else:
                res = space_norm(space, f, _rou(args, f.grid), _space_params(args, phi), detail=True)
    payload = res if isinstance(res, dict) else res.to_json()
    _emit(args, payload, f"norm {space}: {payload['value']:.12g}")
    return 0


def _atom_path(directory, j, k):
    return os.path.join(directory, f"atom_{j}_{'_'.join(map(str, k))}.ffld")


def _atom_spec(args):
    return AtomSpec(args.K, args.L, args.c)


def cmd_atoms(args):
    if args.action == "decompose":
        f = _load_field(args.field)
        rou = _rou(args, f.grid)
        phi = _load_phi(args.phi, args.p, f.grid.d)
        dec = decompose_atomic(f, rou, calderon_pair(rou), _atom_spec(args), _space_params(args, phi), band_tol=args.band_tol)
        payload = {
            "grid": f.grid.to_json(),
            "J_max": rou.J_max,
            "spec": _atom_spec(args).to_json(),
            "C_norm": dec.C_norm,
            "r": dec.r.to_json(),
        }
        if args.atoms_dir:
            os.makedirs(args.atoms_dir, exist_ok=True)
            for (j, k), atom in sorted(dec.atoms.items()):
                _write_field(_atom_path(args.atoms_dir, j, k), atom.values)
        _emit(args, payload, f"atoms decompose: {dec.r.nnz()} coefficients, C={dec.C_norm:g}")
        return 0
    if args.action == "synthesize":
        grid = _grid_of(args)
        obj = _load_json(args.coeffs)
        if isinstance(obj, dict):
            grid = TorusGrid(**obj["grid"]) if "grid" in obj else grid
            obj = obj["r"]
        lam = CoefficientSequence.from_json(grid, obj)
        spec = _atom_spec(args)
        if args.atoms_dir:
            # atoms written by `atoms decompose --atoms-dir`
            atoms = {}
            for (j, k), _ in lam.items():
                a = _load_field(_atom_path(args.atoms_dir, j, k))
                if a.grid != grid:
                    raise ArgumentError(f"atom grid {a.grid} does not match coefficient grid {grid}")
                atoms[(j, k)] = Atom(DyadicCube(j, k), a, spec)
        else:
            atoms = {key: make_atom(DyadicCube(*key), spec, grid) for key, _ in lam.items()}
        f = synthesize(lam, atoms)
        _write_field(args.out, f)
        print(f"atoms synthesize: {len(atoms)} atoms on grid {grid.to_json()} -> {args.out}")
        return 0
    # validate
    f = _load_field(args.field)
    k = _ints(args.k) or (0,) * f.grid.d
    res = validate_atom(Atom(DyadicCube(args.j, k), f, _atom_spec(args)))
    payload = {
        "valid": res.valid,
        "worst_derivative_excess": res.worst_derivative_excess,
        "worst_moment": res.worst_moment,
        "support_leak": res.support_leak,
    }
    _emit(args, payload, f"atoms validate: valid={res.valid}")
    return 0 if res.valid else 1


def cmd_verify(args):
    d, m, n = args.grid or DEFAULT_GRID
    cfg = SuiteConfig(d=d, m=m, n=n, J_max=args.J_max, seed=args.seed, count=args.count)
    baseline = None if args.baseline == "none" else args.baseline
    reports = run_suite(args.suite, cfg, baseline=baseline, stability=not args.no_stability, threads=args.threads)
    text = reports_json(reports)
    if args.out:
        atomic_write_text(args.out, text + "\n")
    summ = summarize(reports)
    line = f"verify {args.suite}: {summ['total'] - summ['failed']}/{summ['total']} passed"
    if summ["failed"]:
        line += " (failed: " + ", ".join(summ["failed_ids"]) + ")"
    print(line)
    return 1 if summ["failed"] else 0


# ---------------------------------------------------------------------------
# parser

def _add_grid(p):
    p.add_argument("--grid", type=_grid, default=None, help="d,m,n (default 1,0,9)")
    p.add_argument("--J-max", dest="J_max", type=int, default=None, help="top block index (default min(7, n-2))")
    p.add_argument("--sharpness", type=float, default=1.0, help="smoothstep sharpness of the resolution")


def _add_space(p, phi_required=True):
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--p", type=_float, default=2.0)
    p.add_argument("--q", type=_float, default=2.0)
    p.add_argument("--phi", required=phi_required, help="PhiSpec JSON file")
    p.add_argument("--sum-from-zero", action="store_true", help="start level sums at j=0 instead of max(j_P, 0)")


def _add_atom_spec(p, K=0, L=-1, c=2.0):
    p.add_argument("--K", type=int, default=K, help="derivative order")
    p.add_argument("--L", type=int, default=L, help="vanishing moment order (-1: none)")
    p.add_argument("--c", type=float, default=c, help="support dilation")


def build_parser():
    ap = argparse.ArgumentParser(prog="besovkit", description="Generalized Besov and Triebel-Lizorkin norms on sampled periodic fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi-check", help="decide weight admissibility and the epsilon condition")
    p.add_argument("--phi", required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_phi_check)

    p = sub.add_parser("field", help="generate, inspect or dump .ffld fields")
    p.add_argument("action", choices=("gen", "info", "cat"))
    p.add_argument("field", nargs="?", help="input .ffld (info, cat)")
    _add_grid(p)
    p.add_argument("--kind", default="random_band_limited_fields", choices=("constant", "mode") + FAMILY_KINDS)
    p.add_argument("--value", type=complex, default=1.0, help="constant value or mode amplitude")
    p.add_argument("--mode", default="", help="integer wave vector k1,...,kd for --kind mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0, help="family member index")
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("blocks", help="write every Littlewood-Paley block of a field")
    p.add_argument("--field", required=True)
    _add_grid(p)
    p.add_argument("--prefix", required=True, help="outputs are PREFIX_j.ffld")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("maximal", help="Hardy-Littlewood, powered or Peetre maximal function")
    p.add_argument("--field", required=True)
    p.add_argument("--kind", choices=("hl", "powered", "peetre"), default="hl")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0, help="Peetre decay exponent")
    p.add_argument("--j", type=int, default=None, help="block index for the Peetre function")
    p.add_argument("--levels", default="", help="window levels l (side 2^-l), comma separated")
    _add_grid(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("lift", help="apply the Bessel potential (1+|xi|^2)^(kappa/2)")
    p.add_argument("--field", required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("norm", help="function or sequence space norm")
    p.add_argument("--space", required=True, choices=("B", "F", "b", "f", "LpPhi", "BinftyInfty"))
    _add_space(p, phi_required=False)
    p.add_argument("--field")
    p.add_argument("--coeffs")
    _add_grid(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("atoms", help="atomic decomposition, synthesis and validation")
    p.add_argument("action", choices=("decompose", "synthesize", "validate"))
    p.add_argument("--field")
    p.add_argument("--coeffs")
    _add_space(p, phi_required=False)
    _add_atom_spec(p)
    _add_grid(p)
    p.add_argument("--j", type=int, default=0, help="cube level (validate)")
    p.add_argument("--k", default="", help="cube offset k1,...,kd (validate)")
    p.add_argument("--band-tol", type=float, default=1e-10)
    p.add_argument("--atoms-dir", default=None, help="decompose: write every atom here; synthesize: read atoms from here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_atoms)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default="all", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=_grid, default=None)
    p.add_argument("--J-max", dest="J_max", type=int, default=None)
    p.add_argument("--count", type=int, default=6, help="family size for bounded-ratio checks")
    p.add_argument("--baseline", default="default", help="baseline JSON path, 'default' or 'none'")
    p.add_argument("--no-stability", action="store_true", help="skip refinement and count-doubling reruns")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default $BESOVKIT_THREADS or 1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


_REQUIRED = {
    ("atoms", "decompose"): ("field", "phi"),
    ("atoms", "synthesize"): ("coeffs", "out"),
    ("atoms", "validate"): ("field",),
    ("field", "info"): ("field",),
    ("field", "cat"): ("field",),
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        for name in _REQUIRED.get((args.command, getattr(args, "action", None)), ()):
            if not getattr(args, name):
                flag = "a FIELD argument" if args.command == "field" else f"--{name}"
                raise ArgumentError(f"{args.command} {args.action} needs {flag}")
        if args.command == "norm" and args.space not in ("BinftyInfty",) and not args.phi:
            raise ArgumentError(f"space {args.space} needs --phi")
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BesovkitError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
