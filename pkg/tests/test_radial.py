import math

import pytest
from hypothesis import given, settings, strategies as st

from rscc import (Monomial, RadialSet, get_builtin, kernel_julia_depth, path_julia_radius, radial_hausdorff,
                  radial_preimage, sample_path_with_maps, semigroup_julia_radial, statewise_julia_radial)
from rscc.builtins import F, G
from rscc.errors import ConfigurationError, InvalidArgument, ResourceError, UnsupportedMap
from rscc.maps import Constant
from rscc.oracles import bounded_orbit_radius, orbit_fate, word_tree_radii
from rscc.radial import fixed_point

L2 = math.log(2)


def close(r: RadialSet, intervals, tol=1e-9):
    return radial_hausdorff(r, RadialSet.of(intervals)) <= tol


# -- semigroup sets -------------------------------------------------------------------------

def test_annulus():
    assert close(semigroup_julia_radial([F, G]), [(0, L2)])
    assert semigroup_julia_radial([F, G]).radii() == [(1.0, 2.0)]


def test_single_maps():
    assert close(semigroup_julia_radial([F]), [(0, 0)], 1e-15)
    assert close(semigroup_julia_radial([G]), [(L2, L2)], 1e-12)


@pytest.mark.parametrize("maps", [[G], [F, G], [G, F, G], [Monomial(3.0, 3)]])
def test_single_circle_matches_orbit_bisection(maps):
    t, _ = path_julia_radius([maps[k % len(maps)] for k in range(60)], 60)
    assert abs(t - bounded_orbit_radius(maps)) < 1e-9


def test_annulus_endpoints_match_orbit_oracle():
    # the all-f and all-g circles bound the annulus
    r = semigroup_julia_radial([F, G])
    assert abs(r.intervals[0][0] - bounded_orbit_radius([F])) < 1e-9
    assert abs(r.intervals[-1][1] - bounded_orbit_radius([G])) < 1e-9


def test_orbits_off_annulus_are_normal():
    # radii outside [1, 2] escape or collapse under every word
    assert orbit_fate([F], 2.5) == 1 and orbit_fate([G], 2.5) == 1
    assert orbit_fate([F], 0.9) == -1 and orbit_fate([G], 0.9) == -1


def test_semigroup_errors():
    with pytest.raises(UnsupportedMap):
        semigroup_julia_radial([Monomial(2.0, 1)])
    with pytest.raises(UnsupportedMap):
        semigroup_julia_radial([Constant(0j)])
    with pytest.raises(InvalidArgument):
        semigroup_julia_radial([F], tol=0)
    with pytest.raises(InvalidArgument):
        semigroup_julia_radial([])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0.2, 5.0), st.integers(2, 4)), min_size=1, max_size=3))
def test_semigroup_set_is_backward_invariant(params):
    maps = [Monomial(c, d) for c, d in params]
    try:
        r = semigroup_julia_radial(maps, tol=1e-4)
    except ResourceError:
        return  # Cantor-type attractors may exceed the interval budget
    for m in maps:
        assert radial_preimage(m, r).within(r, 1e-4)
    lo = min(fixed_point(m) for m in maps)
    hi = max(fixed_point(m) for m in maps)
    assert r.intervals[0][0] == pytest.approx(lo, abs=1e-4)
    assert r.intervals[-1][1] == pytest.approx(hi, abs=1e-4)


def test_cantor_attractor():
    maps = [Monomial(1.0, 3), Monomial(0.3, 3)]
    r = semigroup_julia_radial(maps, tol=1e-4)
    assert len(r) > 50
    for m in maps:
        assert radial_preimage(m, r).within(r, 1e-4)
    with pytest.raises(ResourceError):
        semigroup_julia_radial(maps, tol=1e-12)


# -- preimages and distances ------------------------------------------------------------------

def test_preimages():
    a = RadialSet.of([(0, L2)])
    assert close(radial_preimage(F, a), [(0, L2 / 2)], 1e-15)
    assert close(radial_preimage(G, a), [(L2 / 2, L2)], 1e-15)
    ff = Monomial(1.0, 4)
    assert close(radial_preimage(ff, a), [(0, L2 / 4)], 1e-15)
    assert radial_preimage(ff, a).radii()[0][1] == pytest.approx(2 ** 0.25, abs=1e-15)
    with pytest.raises(UnsupportedMap):
        radial_preimage(Constant(1j), a)


def test_hausdorff_examples():
    a = RadialSet.of([(0, 1)])
    assert radial_hausdorff(a, a) == 0
    assert radial_hausdorff(a, RadialSet(())) == math.inf
    # the point 0 is 2 away from [2, 3]; the gap between the sets is 1
    assert radial_hausdorff(a, RadialSet.of([(2, 3)])) == 2


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 2), st.floats(-3, 3), st.floats(0, 2))
def test_hausdorff_symmetric(a, la, b, lb):
    x, y = RadialSet.of([(a, a + la)]), RadialSet.of([(b, b + lb)])
    assert radial_hausdorff(x, y) == pytest.approx(radial_hausdorff(y, x))


# -- statewise sets ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def jump():
    return get_builtin("jump-annulus")


def test_statewise_jump_annulus(jump):
    sets = statewise_julia_radial(jump)
    assert close(sets["Two"], [(0, L2)])
    assert close(sets["Zero"], [(0, 0)], 1e-15)
    assert close(sets["Ladder"], [(0, L2)])


def test_ladder_set_matches_word_tree(jump):
    ladder = statewise_julia_radial(jump)["Ladder"]
    pts = word_tree_radii(jump, jump.parse_state("1"), 10)
    err = L2 / 2 ** 10
    assert all(ladder.contains(t, tol=err) for t in pts)
    # the word tree fills the interval up to its resolution
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    assert pts[0] <= 2 * err and pts[-1] >= L2 - 2 * err and max(gaps) < 0.01


@pytest.mark.parametrize("name", ["jump-annulus", "reinforcement", "reinforcement-trunc", "frozen", "gdms-demo"])
def test_backward_invariance_over_edges(name):
    spec = get_builtin(name)
    sets = statewise_julia_radial(spec)
    for cls in spec.radial_classes.classes:
        for x, succ in cls.edges:
            for m, _ in spec.tau[x]:
                assert radial_preimage(m, sets[succ]).within(sets[cls.name], 1e-8)


def test_statewise_requires_classes():
    with pytest.raises(ConfigurationError):
        statewise_julia_radial(get_builtin("fattening"))


@pytest.mark.parametrize("start", ["1", "1/3", "2"])
def test_path_circle_inside_statewise_set(jump, start):
    w = jump.parse_state(start)
    target = statewise_julia_radial(jump)[jump.classify(w)]
    for stream in range(100):
        path = sample_path_with_maps(jump, w, 48, 5, stream=stream)
        t, bound = path_julia_radius(path.maps, 48)
        assert target.contains(t, tol=bound + 1e-9)


# -- kernels ------------------------------------------------------------------------------------

def test_kernel_examples(jump):
    c2 = kernel_julia_depth(jump, jump.parse_state("2"), 2)
    assert c2.kind == "EmptyAtDepth" and c2.depth == 2 and str(c2) == "EmptyAtDepth(2)"
    c0 = kernel_julia_depth(jump, jump.parse_state("0"), 2)
    assert c0.kind == "ExactNonempty"
    assert c0.radial.radii() == [(1.0, 1.0)]
    reinf = get_builtin("reinforcement", alpha="1/2")
    assert str(kernel_julia_depth(reinf, reinf.parse_state("0.5"), 2)) == "EmptyAtDepth(2)"


def test_kernel_depth_one_is_not_empty(jump):
    c = kernel_julia_depth(jump, jump.parse_state("2"), 1)
    assert c.kind == "UnknownSuperset"
    # f^-1 and g^-1 of the annulus meet only on the circle of radius sqrt 2
    assert close(c.radial, [(L2 / 2, L2 / 2)])


@pytest.mark.parametrize("state", ["2", "1", "1/4"])
def test_emptiness_is_monotone_in_depth(jump, state):
    w = jump.parse_state(state)
    first = None
    for k in range(1, 9):
        c = kernel_julia_depth(jump, w, k)
        if first is not None:
            assert c.is_empty and c.depth == first
        elif c.is_empty:
            first = c.depth
    assert first is not None


def test_kernel_forward_invariance(jump):
    w = jump.parse_state("0")
    c = kernel_julia_depth(jump, w, 2)
    for m in jump.maps(0):
        succ = kernel_julia_depth(jump, jump.update(jump.space, w, 0), 2)
        assert c.radial.image(m).within(succ.radial, 1e-12)


def test_kernel_errors(jump):
    with pytest.raises(InvalidArgument):
        kernel_julia_depth(jump, jump.parse_state("2"), 0)
    with pytest.raises(ResourceError):
        kernel_julia_depth(jump, jump.parse_state("1"), 3, cap=2)


# -- path radius ----------------------------------------------------------------------------

def test_path_radius_examples():
    t, _ = path_julia_radius([F] * 40, 40)
    assert t == 0
    t, bound = path_julia_radius(lambda k: G, 60)
    assert t == pytest.approx(L2, abs=1e-15) and bound < 1e-15
    t, _ = path_julia_radius(lambda k: G if k % 2 else F, 60)
    assert t == pytest.approx(2 * L2 / 3, abs=1e-15)
    assert math.exp(t) == pytest.approx(2 ** (2 / 3))


def test_path_radius_bound_covers_tail():
    full, _ = path_julia_radius(lambda k: G if k % 3 == 0 else F, 60)
    for depth in (4, 8, 16):
        t, bound = path_julia_radius(lambda k: G if k % 3 == 0 else F, depth)
        assert abs(full - t) <= bound


def test_path_radius_errors():
    with pytest.raises(InvalidArgument):
        path_julia_radius([F], 3)
    with pytest.raises(UnsupportedMap):
        path_julia_radius([Monomial(2.0, 1)], 1)
