import math
from fractions import Fraction

import pytest

from rscc import (Drive, check_irreducible, detect_jump, embed_gdms, fattening_experiment, forced_path,
                  get_builtin, path_julia_radius, propagation_check, sample_path_with_maps, skew_step)
from rscc.analysis import event_probability_oracle, no_jump_discrete_check
from rscc.builtins import F, G
from rscc.errors import InvalidArgument
from rscc.maps import apply_map
from rscc.oracles import infinite_product
from rscc.states import Real

L2 = math.log(2)


def quantized_states(spec):
    lo, hi = spec.space.lo, spec.space.hi
    return [Real(lo + k * (hi - lo) / 20) for k in range(21)]


# -- jumps --------------------------------------------------------------------------------

def test_jump_annulus_forced_x1():
    spec = get_builtin("jump-annulus")
    rep = detect_jump(spec, spec.parse_state("1"), Drive.forced([0]), 50)
    assert rep.verdict == "JumpDetected"
    assert rep.limit_state == spec.parse_state("0")
    assert rep.limit_verdict.kind == "ExactNonempty" and rep.limit_verdict.radial.radii() == [(1.0, 1.0)]
    assert all(c.is_empty for _, _, c in rep.trajectory) and len(rep.trajectory) == 51


def test_reinforcement_forced_one():
    spec = get_builtin("reinforcement", alpha="1/2")
    rep = detect_jump(spec, spec.parse_state("1/2"), Drive.forced([1]), 60)
    assert rep.verdict == "JumpDetected"
    assert rep.limit_state == Real(Fraction(1))
    assert rep.limit_verdict.radial.radii() == [(2.0, 2.0)]


@pytest.mark.parametrize("drive", [Drive.forced([1]), Drive.forced([0]), Drive.forced([0, 1, 1]),
                                   Drive.sampled(0), Drive.sampled(1)])
def test_truncated_never_jumps(drive):
    spec = get_builtin("reinforcement-trunc", alpha="1/2", eps="1/100")
    rep = detect_jump(spec, spec.parse_state("1/2"), drive, 200)
    assert rep.verdict == "NoJumpWithinHorizon"


@pytest.mark.parametrize("name", ["gdms-demo", "frozen", "constant"])
@pytest.mark.parametrize("drive", [Drive.forced([0]), Drive.sampled(3)])
def test_discrete_scenarios_never_jump(name, drive):
    spec = get_builtin(name)
    assert no_jump_discrete_check(spec)
    for horizon in (1, 10, 100):
        assert detect_jump(spec, spec.parse_state("1"), drive, horizon).verdict == "NoJumpWithinHorizon"


def test_no_jump_discrete_check():
    assert no_jump_discrete_check(get_builtin("gdms-demo"))
    assert not no_jump_discrete_check(get_builtin("jump-annulus"))
    assert not no_jump_discrete_check(get_builtin("reinforcement"))


def test_jump_not_applicable_without_classes():
    spec = get_builtin("feedback")
    assert detect_jump(spec, spec.parse_state("1"), Drive.sampled(0), 5).verdict == "NotApplicable"


def test_inadmissible_forced_drive():
    spec = get_builtin("jump-annulus")
    with pytest.raises(InvalidArgument):
        detect_jump(spec, spec.parse_state("0"), Drive.forced([1]), 5)
    with pytest.raises(InvalidArgument):
        Drive.forced([])


def test_jump_verdict_stable_in_kernel_depth():
    spec = get_builtin("jump-annulus")
    for depth in (2, 3, 4):
        rep = detect_jump(spec, spec.parse_state("1"), Drive.forced([0]), 30, kernel_depth=depth)
        assert rep.verdict == "JumpDetected"


def test_report_serialisation():
    spec = get_builtin("jump-annulus")
    rep = detect_jump(spec, spec.parse_state("1"), Drive.forced([0]), 5)
    doc = rep.to_json()
    assert doc["verdict"] == "JumpDetected" and doc["limit_state"] == "0"
    text = rep.to_csv()
    assert text.startswith("step,state,kernel\r\n") and text.count("\r\n") == 8
    assert text.endswith("limit,0,\"ExactNonempty(radii: [1, 1])\"\r\n")


# -- irreducibility -------------------------------------------------------------------------

def test_two_state_complete_graph():
    spec = embed_gdms(2, {(1, 1): [(F, 0.5)], (1, 2): [(G, 0.5)], (2, 1): [(F, 0.3)], (2, 2): [(G, 0.7)]})
    res = check_irreducible(spec, [spec.parse_state("1"), spec.parse_state("2")], 2)
    assert res.irreducible and res.witness is None and res.closed


def test_jump_annulus_not_irreducible():
    spec = get_builtin("jump-annulus")
    states = [spec.parse_state(s) for s in ("1", "1/2", "2", "0")]
    res = check_irreducible(spec, states, 50)
    assert not res
    assert res.witness == (spec.parse_state("2"), spec.parse_state("0"))
    assert not res.closed
    with pytest.raises(InvalidArgument):
        check_irreducible(spec, states, 50, strict=True)


def test_quantized_grid_irreducible():
    spec = get_builtin("reinforcement-quantized")
    res = check_irreducible(spec, quantized_states(spec), 200, strict=True)
    assert res.irreducible and res.closed


def test_irreducible_matches_bfs_on_gdms():
    spec = get_builtin("gdms-demo")
    assert check_irreducible(spec, [spec.parse_state("1"), spec.parse_state("2")], 3)


# -- propagation ------------------------------------------------------------------------------

def test_propagation_quantized():
    spec = get_builtin("reinforcement-quantized")
    res = propagation_check(spec, quantized_states(spec))
    assert res.holds and not res.vacuous
    assert all(str(c) == "EmptyAtDepth(2)" for _, c in res.verdicts)


def test_propagation_two_state_fg():
    both = [(F, 0.25), (G, 0.25)]
    spec = embed_gdms(2, {(1, 1): both, (1, 2): both, (2, 1): both, (2, 2): both})
    res = propagation_check(spec, [spec.parse_state("1"), spec.parse_state("2")])
    assert res.holds and all(c.is_empty for _, c in res.verdicts)


def test_propagation_vacuous():
    spec = embed_gdms(2, {(1, 1): [(F, 0.5)], (1, 2): [(F, 0.5)], (2, 1): [(F, 0.5)], (2, 2): [(F, 0.5)]})
    res = propagation_check(spec, [spec.parse_state("1"), spec.parse_state("2")])
    assert res.holds and res.vacuous
    assert all(c.kind == "UnknownSuperset" for _, c in res.verdicts)


def test_propagation_needs_irreducible():
    spec = get_builtin("jump-annulus")
    with pytest.raises(InvalidArgument):
        propagation_check(spec, [spec.parse_state("2"), spec.parse_state("0")])


def test_irreducible_and_empty_means_no_jump():
    spec = get_builtin("reinforcement-quantized")
    states = quantized_states(spec)
    assert check_irreducible(spec, states, 200)
    for seed in range(4):
        for w in states[::5]:
            assert detect_jump(spec, w, Drive.sampled(seed), 80).verdict != "JumpDetected"


# -- fattening --------------------------------------------------------------------------------

def test_fattening_forced():
    tr = fattening_experiment(0.1, 60, y0=0.1)
    assert all(math.isinf(du) for _, _, _, du, _ in tr.steps)
    for k, y, w, _, dt in tr.steps:
        assert y == pytest.approx(0.1 * 2.0 ** -k, rel=1e-15)
        if 1 / (k + 1) < 0.1:
            assert dt == y
        else:
            assert math.isinf(dt)
    assert tr.steps[-1][4] < 1e-18


def test_fattening_thickened_distance_nonincreasing():
    tr = fattening_experiment(0.05, 80, y0=0.07)
    finite = [dt for k, _, _, _, dt in tr.steps if 1 / (k + 1) < 0.05]
    assert finite and all(b <= a for a, b in zip(finite, finite[1:]))


def test_event_probability():
    tr = fattening_experiment(0.1, 5)
    assert tr.event_probability == pytest.approx(0.2887881, abs=1e-6)
    assert event_probability_oracle() == infinite_product(60)
    assert abs(tr.event_probability - infinite_product(200)) < 1e-15


def test_fattening_sampled_and_errors():
    tr = fattening_experiment(0.1, 30, seed=1, forced=False)
    assert len(tr.steps) == 31 and not tr.forced
    for bad in (dict(eps=0.0, horizon=5), dict(eps=0.1, horizon=0), dict(eps=0.1, horizon=5, y0=0.2)):
        with pytest.raises(InvalidArgument):
            fattening_experiment(**bad)
    assert tr.to_csv().startswith("k,y,state,dist_unfattened,dist_thickened\r\n")


# -- skew product -------------------------------------------------------------------------------

def test_skew_all_f():
    spec = get_builtin("jump-annulus")
    path = forced_path(spec, spec.parse_state("0"), (0,) * 30)
    shifted, image = skew_step(path, 1.5 + 0j)
    assert image == apply_map(F, 1.5 + 0j)
    assert len(shifted) == 29
    assert path_julia_radius(shifted.maps, 29)[0] == 0 == path_julia_radius(path.maps, 30)[0]


def test_skew_g_then_f():
    spec = get_builtin("jump-annulus")
    path = forced_path(spec, spec.parse_state("2"), (1,) * 30, maps=(G,) + (F,) * 29)
    shifted, image = skew_step(path, 0.3 + 0.4j)
    assert image == apply_map(G, 0.3 + 0.4j)
    assert path_julia_radius(path.maps, 30)[0] == pytest.approx(L2 / 2, abs=1e-15)


def test_skew_image_on_sampled_paths():
    spec = get_builtin("jump-annulus")
    for stream in range(20):
        path = sample_path_with_maps(spec, spec.parse_state("1"), 40, 9, stream=stream)
        shifted, image = skew_step(path, 1.1 + 0.1j)
        assert image == apply_map(path.maps[0], 1.1 + 0.1j)
        assert shifted.indices == path.indices[1:] and shifted.states == path.states[1:]


def test_skew_empty_prefix():
    spec = get_builtin("jump-annulus")
    path = forced_path(spec, spec.parse_state("0"), ())
    with pytest.raises(InvalidArgument):
        skew_step(path, 1j)
