import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rscc import (Monomial, admissible_words, cylinder_prob, embed_gdms, get_builtin, sample_chain,
                  sample_path_with_maps, transition_probs, update_state)
from rscc.builtins import F, G
from rscc.config import dump_scenario, load_scenario, parse_scenario
from rscc.errors import ConfigurationError, DomainError, InvalidArgument, ResourceError
from rscc.scenario import reachable_states
from rscc.states import Real

STARTS = {"jump-annulus": "1", "fattening": "1", "reinforcement": "0.5", "reinforcement-trunc": "0.5",
          "reinforcement-quantized": "0.5", "feedback": "0.5", "gdms-demo": "1", "frozen": "1", "constant": "1"}
BUILTINS = sorted(STARTS)


@pytest.fixture(scope="module")
def jump():
    return get_builtin("jump-annulus")


@pytest.fixture(scope="module")
def reinf():
    return get_builtin("reinforcement", alpha="1/2")


def st_(spec, text):
    return spec.parse_state(text)


# -- update and transition ---------------------------------------------------------------

def test_ladder_update(jump):
    assert update_state(jump, st_(jump, "1/3"), 0) == st_(jump, "1/4")
    assert update_state(jump, st_(jump, "2"), 1) == st_(jump, "2")
    assert update_state(jump, st_(jump, "1/3"), 1) == st_(jump, "2")


def test_clamp_affine_update(reinf):
    assert update_state(reinf, st_(reinf, "0.5"), 1) == Real(Fraction(3, 4))
    assert update_state(reinf, st_(reinf, "0.5"), 0) == Real(Fraction(1, 4))


def test_update_errors(jump):
    with pytest.raises(InvalidArgument):
        update_state(jump, st_(jump, "1"), 5)
    with pytest.raises(DomainError):
        update_state(jump, Real(Fraction(1, 2)), 0)
    with pytest.raises(DomainError):
        jump.parse_state("7")


def test_transition_rows(jump):
    (x1, p1), (x2, p2) = transition_probs(jump, st_(jump, "1/2"))
    assert p1 == pytest.approx(1 - 2 ** -0.5, abs=1e-12)
    assert p2 == pytest.approx(2 ** -0.5, abs=1e-12)
    assert transition_probs(jump, st_(jump, "0")) == [(0, 1.0), (1, 0.0)]
    assert transition_probs(jump, st_(jump, "2")) == [(0, 0.0), (1, 1.0)]


@pytest.mark.parametrize("name", BUILTINS)
def test_rows_are_probability_vectors(name):
    spec = get_builtin(name)
    w0 = spec.parse_state(STARTS[name])
    for w in [w0, *reachable_states(spec, w0, 3)]:
        probs = [p for _, p in transition_probs(spec, w)]
        assert min(probs) >= 0 and sum(probs) == pytest.approx(1.0, abs=1e-12)


# -- cylinders and words -----------------------------------------------------------------

def test_cylinder_examples(jump):
    one = st_(jump, "1")
    assert cylinder_prob(jump, one, (0,)) == 0.5
    assert cylinder_prob(jump, one, ()) == 1.0
    assert cylinder_prob(jump, one, (0, 0)) == pytest.approx(0.5 * (1 - 2 ** -0.5), abs=1e-15)


words = st.lists(st.integers(0, 1), max_size=6)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["1", "1/2", "1/5", "0", "2"]), words, words)
def test_chain_rule(state, a, b):
    spec = get_builtin("jump-annulus")
    w = spec.parse_state(state)
    mid = w
    for x in a:
        mid = spec.update(spec.space, mid, x)
    lhs = cylinder_prob(spec, w, a + b)
    rhs = cylinder_prob(spec, w, a) * cylinder_prob(spec, mid, b)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.fractions(0, 1, max_denominator=50), st.lists(st.integers(0, 1), min_size=1, max_size=5),
       st.lists(st.integers(0, 1), max_size=5))
def test_chain_rule_reinforcement(p, a, b):
    spec = get_builtin("reinforcement", alpha="1/3")
    w = Real(p)
    mid = w
    for x in a:
        mid = spec.update(spec.space, mid, x)
    assert cylinder_prob(spec, w, a + b) == pytest.approx(
        cylinder_prob(spec, w, a) * cylinder_prob(spec, mid, b), abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_cylinders_of_fixed_length_sum_to_one(jump, n):
    w = st_(jump, "1")
    total = sum(cylinder_prob(jump, w, word) for word in admissible_words(jump, w, n))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_admissible_words(jump):
    assert admissible_words(jump, st_(jump, "2"), 1) == [(1,)]
    assert admissible_words(jump, st_(jump, "0"), 1) == [(0,)]
    assert admissible_words(jump, st_(jump, "1"), 1) == [(0,), (1,)]
    with pytest.raises(ResourceError):
        admissible_words(jump, st_(jump, "1"), 30)


def test_admissible_words_match_brute_force(jump):
    w = st_(jump, "1/2")
    brute = [wd for wd in itertools.product(range(2), repeat=4) if cylinder_prob(jump, w, wd) > 0]
    assert admissible_words(jump, w, 4) == brute


def test_reachable_states(jump):
    assert reachable_states(jump, st_(jump, "2"), 5) == [st_(jump, "2")]
    assert set(reachable_states(jump, st_(jump, "1/4"), 1)) == {st_(jump, "1/5"), st_(jump, "2")}
    fat = get_builtin("fattening")
    assert reachable_states(fat, st_(fat, "0"), 5) == [st_(fat, "0")]


# -- sampling ------------------------------------------------------------------------------

@pytest.mark.parametrize("name,state", [("jump-annulus", "1"), ("reinforcement", "0.3"), ("gdms-demo", "1")])
def test_sample_chain_consistent(name, state):
    spec = get_builtin(name)
    w = spec.parse_state(state)
    for seed in range(5):
        word, states = sample_chain(spec, w, 25, seed)
        assert states[0] == w and len(states) == 26
        for k, x in enumerate(word):
            assert states[k + 1] == update_state(spec, states[k], x)
            assert cylinder_prob(spec, states[k], (x,)) > 0
        assert (word, states) == sample_chain(spec, w, 25, seed)


def test_state_zero_only_x1(jump):
    for seed in range(20):
        word, states = sample_chain(jump, st_(jump, "0"), 10, seed)
        assert word == (0,) * 10 and all(s == st_(jump, "0") for s in states)


def test_first_index_frequency(jump):
    w = st_(jump, "1")
    hits = sum(sample_chain(jump, w, 1, seed)[0][0] == 0 for seed in range(100_000))
    assert abs(hits / 100_000 - 0.5) <= 0.01


def test_map_frequency_given_x2(jump):
    w = st_(jump, "2")
    n_g = 0
    for stream in range(100_000):
        path = sample_path_with_maps(jump, w, 1, 11, stream=stream)
        assert path.indices == (1,)
        n_g += path.maps[0] == G
    assert abs(n_g / 100_000 - 0.5) <= 0.01


def test_dirac_tau_determines_maps():
    spec = get_builtin("reinforcement")
    path = sample_path_with_maps(spec, spec.parse_state("0.4"), 12, 3)
    for x, m in zip(path.indices, path.maps):
        assert m == spec.tau[x][0][0]


def test_log_prob_matches_enumeration(reinf):
    w = st_(reinf, "0.5")
    for seed in range(10):
        path = sample_path_with_maps(reinf, w, 3, seed)
        table = {word: cylinder_prob(reinf, w, word) for word in itertools.product(range(2), repeat=3)}
        assert sum(table.values()) == pytest.approx(1.0)
        assert math.exp(path.log_prob) == pytest.approx(table[path.indices], abs=1e-10)


def test_jump_log_prob_includes_map_weight(jump):
    path = sample_path_with_maps(jump, st_(jump, "2"), 4, 0)
    assert math.exp(path.log_prob) == pytest.approx(0.5 ** 4)


# -- GDMS embedding ------------------------------------------------------------------------

def test_gdms_single_vertex():
    spec = embed_gdms(1, {(1, 1): [(F, 1.0)]})
    assert admissible_words(spec, spec.parse_state("1"), 5) == [(0,) * 5]


def test_gdms_alternating():
    spec = embed_gdms(2, {(1, 2): [(F, 1.0)], (2, 1): [(G, 1.0)]})
    assert admissible_words(spec, spec.parse_state("1"), 4) == [(0, 1, 0, 1)]
    assert admissible_words(spec, spec.parse_state("2"), 4) == [(1, 0, 1, 0)]


def test_gdms_row_sum_violation():
    with pytest.raises(InvalidArgument):
        embed_gdms(2, {(1, 2): [(F, 0.5)], (2, 1): [(F, 1.0)]})


def test_gdms_family_matches_graph_paths():
    edges = {(1, 1): [(F, 0.3)], (1, 2): [(G, 0.7)], (2, 1): [(F, 0.5), (G, 0.5)]}
    spec = embed_gdms(2, edges)
    ends = {name: (int(name[1]), int(name[3])) for name in spec.indices}
    for start in (1, 2):
        for n in range(1, 5):
            graph = set()
            for seq in itertools.product(sorted(edges), repeat=n):
                if seq[0][0] == start and all(a[1] == b[0] for a, b in zip(seq, seq[1:])):
                    graph.add(seq)
            words = admissible_words(spec, spec.parse_state(str(start)), n)
            assert {tuple(ends[spec.indices[x]] for x in wd) for wd in words} == graph
            for wd in words:
                assert all(set(spec.maps(x)) == {m for m, _ in edges[ends[spec.indices[x]]]} for x in wd)


# -- configuration -------------------------------------------------------------------------

@pytest.mark.parametrize("name", BUILTINS)
def test_config_round_trip(name):
    spec = get_builtin(name)
    text = dump_scenario(spec)
    again = parse_scenario(text)
    assert again == spec
    assert dump_scenario(again) == text


def test_config_file_load(tmp_path):
    p = tmp_path / "s.ini"
    p.write_text(dump_scenario(get_builtin("jump-annulus")), encoding="utf-8")
    assert load_scenario(str(p)) == get_builtin("jump-annulus")
    with pytest.raises(InvalidArgument):
        load_scenario(str(tmp_path / "missing.ini"))


def test_config_rejects_bad_weights():
    text = dump_scenario(get_builtin("jump-annulus")).replace("weights = 0.5, 0.5", "weights = 0.5, 0.6")
    with pytest.raises(ConfigurationError):
        parse_scenario(text)


def test_monomial_coefficients_exact_in_config():
    spec = get_builtin("jump-annulus")
    assert spec.tau[1] == ((Monomial(1.0, 2), 0.5), (Monomial(0.5, 2), 0.5))
