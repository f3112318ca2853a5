import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besovkit.analysis import build_resolution
from besovkit.atoms import (
    Atom,
    AtomSpec,
    analyze_calderon,
    calderon_pair,
    decompose_atomic,
    make_atom,
    multi_indices,
    partition_windows,
    synthesize,
    validate_atom,
)
from besovkit.errors import ArgumentError, DecompositionError, PreconditionError
from besovkit.harness import TestFamily
from besovkit.lattice import DyadicCube, SampledField, TorusGrid
from besovkit.phi import PhiSpec
from besovkit.spaces import CoefficientSequence, SpaceParams, seq_b_norm


def band_limited(grid, J, seed):
    return TestFamily("random_band_limited_fields", count=1, seed=seed, grid=grid, J_max=J, band=float(J)).member(0)


def moment_loop(values, grid, Q, beta):
    """Periodic moment about the center of Q, summed sample by sample."""
    T = grid.extent
    tot = 0.0
    for idx in itertools.product(range(grid.N), repeat=grid.d):
        mono = 1.0
        for ax, (i, b) in enumerate(zip(idx, beta)):
            center = (Q.k[ax] + 0.5) * Q.side
            r = ((i * grid.h - center + T / 2) % T) - T / 2
            mono *= r**b
        tot += mono * values[idx]
    return abs(tot) * grid.cell_volume


def test_multi_indices():
    assert multi_indices(2, 1) == [(0, 0), (0, 1), (1, 0)]
    assert len(multi_indices(3, 2)) == 10
    assert multi_indices(2, -1) == []


@pytest.mark.parametrize(
    "grid,Q,spec",
    [
        (TorusGrid(1, 1, 9), DyadicCube(0, (1,)), AtomSpec(2, -1, 2.0)),
        (TorusGrid(1, 0, 9), DyadicCube(3, (5,)), AtomSpec(1, 2, 2.0)),
        (TorusGrid(2, 0, 6), DyadicCube(2, (1, 3)), AtomSpec(1, 1, 2.0)),
    ],
)
def test_make_atom_is_valid(grid, Q, spec):
    a = make_atom(Q, spec, grid)
    v = validate_atom(a)
    assert v.valid, v
    assert v.worst_derivative_excess == pytest.approx(1.0, rel=1e-9)
    if spec.L >= 0:
        l1 = grid.cell_volume * np.sum(np.abs(a.values.values))
        for beta in multi_indices(grid.d, spec.L):
            assert moment_loop(a.values.values, grid, Q, beta) <= 1e-8 * l1 * (spec.c * Q.side) ** sum(beta)


def test_atom_translates_agree():
    g = TorusGrid(1, 0, 8)
    spec = AtomSpec(1, 1, 2.0)
    a0 = make_atom(DyadicCube(2, (0,)), spec, g).values.values
    a3 = make_atom(DyadicCube(2, (3,)), spec, g).values.values
    assert np.array_equal(np.roll(a0, 3 * g.samples_per_cube(2)), a3)


@given(t=st.floats(-1.0, 1.0))
def test_atoms_are_homogeneous(t):
    g = TorusGrid(1, 0, 8)
    a = make_atom(DyadicCube(2, (1,)), AtomSpec(1, 0, 2.0), g)
    scaled = Atom(a.cube, a.values * t, a.spec)
    assert validate_atom(scaled).valid


def test_invalid_atoms_detected():
    g = TorusGrid(1, 0, 8)
    Q = DyadicCube(2, (1,))
    a = make_atom(Q, AtomSpec(1, 0, 2.0), g)
    assert not validate_atom(Atom(Q, a.values * 1.01, a.spec)).valid
    # same samples attributed to a far cube leak outside its support
    assert validate_atom(Atom(DyadicCube(2, (3,)), a.values, a.spec)).support_leak > 1e-3
    # a plain bump has a nonzero mean
    bump = make_atom(Q, AtomSpec(1, -1, 2.0), g)
    assert not validate_atom(Atom(Q, bump.values, AtomSpec(1, 0, 2.0))).valid


def test_make_atom_preconditions():
    with pytest.raises(PreconditionError):
        make_atom(DyadicCube(6, (0,)), AtomSpec(), TorusGrid(1, 0, 8))
    with pytest.raises(ArgumentError):
        make_atom(DyadicCube(0, (0,)), AtomSpec(c=2.0), TorusGrid(1, 0, 8))
    with pytest.raises(ArgumentError):
        AtomSpec(c=1.0)


def test_for_space():
    prm = SpaceParams(0.5, 0.75, 2.0, PhiSpec.constant(1.0, 1, 0.75))
    spec = AtomSpec.for_space(prm, "B")
    assert spec.K == 1 and spec.L == -1


def test_synthesize_single_coefficient():
    g = TorusGrid(1, 0, 8)
    lam = CoefficientSequence.zeros(g, 3)
    lam[3, (2,)] = 2 - 1j
    a = make_atom(DyadicCube(3, (2,)), AtomSpec(), g)
    f = synthesize(lam, {(3, (2,)): a})
    assert np.allclose(f.values, (2 - 1j) * a.values.values)
    with pytest.raises(ArgumentError):
        synthesize(lam, {})


@given(seed=st.integers(0, 500))
def test_calderon_round_trip(seed):
    g = TorusGrid(1, 0, 8)
    rou = build_resolution(g, 6)
    f = band_limited(g, 6, seed)
    ana = analyze_calderon(f, rou, calderon_pair(rou))
    assert np.max(np.abs(ana.recon.values - f.values)) < 1e-8 * f.sup()


def test_calderon_round_trip_2d():
    g = TorusGrid(2, 1, 5)
    rou = build_resolution(g, 3)
    f = band_limited(g, 3, 11)
    ana = analyze_calderon(f, rou, calderon_pair(rou))
    assert np.max(np.abs(ana.recon.values - f.values)) < 1e-8 * f.sup()


def test_calderon_coefficients_are_linear_and_sampled():
    g = TorusGrid(1, 0, 8)
    rou = build_resolution(g, 6)
    dual = calderon_pair(rou)
    f, h = band_limited(g, 6, 1), band_limited(g, 6, 2)
    lf = analyze_calderon(f, rou, dual).lam
    lh = analyze_calderon(h, rou, dual).lam
    lc = analyze_calderon(f * 3.0 + h * 1j, rou, dual).lam
    for a, b, c in zip(lf.levels, lh.levels, lc.levels):
        assert np.allclose(c, 3 * a + 1j * b, atol=1e-12)
    from besovkit.analysis import lp_block

    j = 4
    expected = 2.0 ** (-j) * lp_block(f, rou, j).values[:: g.samples_per_cube(j)]
    assert np.allclose(lf.levels[j], expected, atol=1e-14)


def test_analysis_rejects_out_of_band_fields():
    g = TorusGrid(1, 0, 8)
    rou = build_resolution(g, 4)
    f = band_limited(g, 6, 0)
    with pytest.raises(PreconditionError, match="band-limited"):
        analyze_calderon(f, rou, calderon_pair(rou))


def test_partition_windows_sum_to_one():
    g = TorusGrid(2, 0, 5)
    b0, norm = partition_windows(g, 2, 2.0)
    S = g.samples_per_cube(2)
    total = sum(np.roll(b0, (kx * S, ky * S), axis=(0, 1)) / norm for kx in range(4) for ky in range(4))
    assert np.allclose(total, 1.0)


@pytest.mark.parametrize("d,n,J", [(1, 8, 6), (2, 5, 3)])
def test_atomic_decomposition_round_trip_and_atoms(d, n, J):
    g = TorusGrid(d, 0, n)
    rou = build_resolution(g, J)
    f = band_limited(g, J, 5)
    prm = SpaceParams(0.5, 2.0, 2.0, PhiSpec.power(d / 4, d, 2.0))
    spec = AtomSpec(1, -1, 2.0)
    dec = decompose_atomic(f, rou, calderon_pair(rou), spec, prm)
    assert np.max(np.abs(dec.synthesize().values - f.values)) < 1e-6 * f.sup()
    assert math.log2(dec.C_norm) == int(math.log2(dec.C_norm))
    # every atom on a sufficiently resolved level meets its bounds
    for (j, k), atom in dec.atoms.items():
        if n - j >= 4 and dec.r[j, k] != 0:
            assert validate_atom(atom).valid
    assert seq_b_norm(dec.r, prm) > 0


def test_atomic_decomposition_of_an_atom():
    g = TorusGrid(1, 2, 9)
    rou = build_resolution(g, 7)
    spec = AtomSpec(2, 1, 4.0)
    atom = make_atom(DyadicCube(0, (0,)), spec, g)
    prm = SpaceParams(0.5, 2.0, 2.0, PhiSpec.power(0.25, 1, 2.0))
    dec = decompose_atomic(atom.values, rou, calderon_pair(rou), spec, prm, band_tol=1e-6)
    assert np.max(np.abs(dec.synthesize().values - atom.values.values)) < 1e-6 * atom.values.sup()


def test_decomposition_normalization_cap():
    g = TorusGrid(1, 0, 8)
    rou = build_resolution(g, 6)
    f = band_limited(g, 6, 3)
    prm = SpaceParams(0.5, 2.0, 2.0, PhiSpec.power(0.25, 1, 2.0))
    with pytest.raises(DecompositionError):
        decompose_atomic(f, rou, calderon_pair(rou), AtomSpec(1, -1, 2.0), prm, max_log2_norm=-30)


def test_zero_field_decomposes_to_nothing():
    g = TorusGrid(1, 0, 7)
    rou = build_resolution(g, 5)
    prm = SpaceParams(0.5, 2.0, 2.0, PhiSpec.constant(1.0, 1, 2.0))
    dec = decompose_atomic(SampledField(g, np.zeros(g.shape)), rou, calderon_pair(rou), AtomSpec(), prm)
    assert dec.atoms == {} and dec.r.nnz() == 0
