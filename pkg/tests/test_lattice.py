import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besovkit.errors import ArgumentError
from besovkit.lattice import (
    DyadicCube,
    SampledField,
    TorusGrid,
    coarsen,
    cube_slices,
    cubes_at_level,
    ell_infinity_on_cube,
    integrate_p,
    level_sums,
    read_ffld,
    refine,
    write_ffld,
)

import oracles


def random_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    return SampledField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def test_grid_geometry():
    g = TorusGrid(2, 1, 3)
    assert g.N == 16 and g.h == 0.125 and g.extent == 2.0
    assert g.cells_per_axis(-1) == 1 and g.samples_per_cube(-1) == 16
    assert g.shape == (16, 16)
    with pytest.raises(ArgumentError):
        TorusGrid(0, 0, 3)
    with pytest.raises(ArgumentError):
        g.check_level(4)


def test_frequencies_are_angular():
    g = TorusGrid(1, 2, 3)
    assert np.allclose(g.frequencies(), oracles.angular_frequencies(g.N, g.extent))
    assert g.frequencies()[1] == pytest.approx(2 * math.pi / 4)


def test_cube_relations():
    Q = DyadicCube(2, (3, 1))
    assert Q.side == 0.25 and Q.volume == 0.0625
    assert Q.parent() == DyadicCube(1, (1, 0))
    kids = Q.children()
    assert len(kids) == 4 and all(c.parent() == Q for c in kids)
    assert Q.contains((0.75, 0.25)) and not Q.contains((1.0, 0.25))
    assert DyadicCube(-1, (0,)).level0 == 0


@given(d=st.integers(1, 2), m=st.integers(0, 2), j=st.integers(-2, 4))
def test_cubes_tile_and_nest(d, m, j):
    g = TorusGrid(d, m, 4)
    if not -m <= j <= g.n - 1:
        return
    cubes = list(cubes_at_level(g, j))
    assert len(cubes) == g.cells_per_axis(j) ** d
    cover = np.zeros(g.shape, dtype=int)
    for Q in cubes:
        cover[cube_slices(g, Q)] += 1
    assert np.all(cover == 1)
    parents = {c.parent() for c in cubes_at_level(g, j + 1)}
    assert parents == set(cubes)


def test_integrate_p_constant_and_indicator():
    g = TorusGrid(2, 0, 4)
    c = SampledField(g, np.full(g.shape, -3.0))
    Q = DyadicCube(1, (1, 0))
    for p in (0.5, 1.0, 2.0, 3.7):
        assert integrate_p(c, Q, p) == pytest.approx(3.0 * Q.side ** (2 / p), rel=1e-13)
    spike = np.zeros(g.shape)
    spike[9, 2] = 1.0
    assert integrate_p(SampledField(g, spike), Q, 2.0) == pytest.approx(g.h ** (2 / 2), rel=1e-14)
    assert ell_infinity_on_cube(SampledField(g, spike), Q) == 1.0
    with pytest.raises(ArgumentError):
        integrate_p(c, Q, 0.0)


@given(seed=st.integers(0, 1000), p=st.sampled_from([0.75, 1.0, 2.0, 4.0]), j=st.integers(0, 3))
def test_integrate_p_matches_loop_oracle(seed, p, j):
    g = TorusGrid(2, 0, 3)
    f = random_field(g, seed)
    for Q in cubes_at_level(g, j):
        corner = tuple(k * g.samples_per_cube(j) for k in Q.k)
        ref = oracles.cube_lp(f.values, g.h, corner, g.samples_per_cube(j), p)
        assert integrate_p(f, Q, p) == pytest.approx(ref, rel=1e-13)


@given(seed=st.integers(0, 1000), p=st.sampled_from([0.5, 1.0, 3.0]))
def test_tiling_identity_and_homogeneity(seed, p):
    g = TorusGrid(1, 1, 5)
    f = random_field(g, seed)
    whole = DyadicCube(-1, (0,))
    tot = integrate_p(f, whole, p) ** p
    for j in range(-1, 5):
        s = sum(integrate_p(f, Q, p) ** p for Q in cubes_at_level(g, j))
        assert s == pytest.approx(tot, rel=1e-12)
    assert integrate_p(f * 2.5j, whole, p) == pytest.approx(2.5 * integrate_p(f, whole, p), rel=1e-13)


def test_coarsen_refine_level_sums():
    rng = np.random.default_rng(1)
    a = rng.random((8, 8))
    c = coarsen(a, 4)
    assert c.shape == (2, 2)
    assert c[1, 0] == pytest.approx(a[4:8, 0:4].sum())
    assert coarsen(a, 2, "max")[0, 0] == a[:2, :2].max()
    assert np.array_equal(coarsen(refine(c, 4), 4), 16 * c)
    g = TorusGrid(2, 0, 3)
    assert np.allclose(level_sums(a, g, 1), coarsen(a, 4) * g.h**2)


def test_ffld_round_trip_and_header(tmp_path):
    g = TorusGrid(2, 1, 3)
    f = random_field(g, 7)
    path = tmp_path / "f.ffld"
    write_ffld(path, f)
    raw = path.read_bytes()
    header, data = raw.split(b"\n", 1)
    assert json.loads(header) == {"d": 2, "m": 1, "n": 3, "dtype": "c128", "count": g.size}
    assert len(data) == 16 * g.size
    # little-endian interleaved (re, im), row-major
    first = np.frombuffer(data[:16], dtype="<f8")
    assert first[0] == f.values[0, 0].real and first[1] == f.values[0, 0].imag
    back = read_ffld(path)
    assert back.grid == g and np.array_equal(back.values, f.values)
    assert not list(tmp_path.glob(".tmp-*"))


def test_ffld_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.ffld"
    bad.write_bytes(b'{"d":1,"m":0,"n":3,"dtype":"c128","count":8}\n' + b"\0" * 10)
    with pytest.raises(ArgumentError):
        read_ffld(bad)
    bad.write_bytes(b"not json\n")
    with pytest.raises(ArgumentError):
        read_ffld(bad)
    bad.write_bytes(b'{"d":1,"m":0,"n":3,"dtype":"f64","count":8}\n')
    with pytest.raises(ArgumentError):
        read_ffld(bad)


def test_sampled_field_validation():
    g = TorusGrid(1, 0, 3)
    with pytest.raises(ArgumentError):
        SampledField(g, np.zeros(7))
    with pytest.raises(ArgumentError):
        SampledField(g, np.full(8, np.nan))
    with pytest.raises(ArgumentError):
        SampledField(g, np.zeros(8)) + SampledField(TorusGrid(1, 1, 2), np.zeros(8))
