from itertools import product

import pytest
from hypothesis import given, strategies as st

from oracles import consistent_oracle, oracle_action
from rmdl_lab.agent import (BudgetExhausted, Environment, GeneralizedAction, History,
                            MacroAlphabet, MacroHistory, aixi_action, best_model_action,
                            builtin_environments, consistent_models, decomposed_models,
                            direct_action_search, direct_plan, extrapolate_models,
                            generalized_action_search, get_environment, joint_model,
                            measured_search_counts, mixture_decision, run_episode,
                            run_macro_episode, scripted_history, search_cost_report,
                            single_model_decision)
from rmdl_lab.bits import BitString
from rmdl_lab.complexity import Budget
from rmdl_lab.hierarchy import Segmentation
from rmdl_lab.machine import Program, assemble

B = Budget(15, 1, 200)
ONE, ZERO = BitString("1"), BitString("0")


def obs_of(env, actions):
    return [p.observation.bits for p in scripted_history(env, actions).percepts]


def test_builtin_worlds():
    acts = [ONE, ZERO, ZERO, ONE, ONE, ZERO]
    assert obs_of(get_environment("constant"), acts) == ["1"] * 6
    assert obs_of(get_environment("alternation"), acts) == ["1", "0"] * 3
    assert obs_of(get_environment("match_previous"), acts) == [a.bits for a in acts]
    assert obs_of(get_environment("two_phase"), acts) == ["1", "1", "1", "0", "0", "0"]
    assert get_environment("two_phase").boundaries == (3,)
    with pytest.raises(KeyError):
        get_environment("nope")


def test_environment_declaration_checks():
    p = ((1, assemble(",.")),)
    with pytest.raises(ValueError):
        Environment("x", 1, 2, "match", p)
    with pytest.raises(ValueError):
        Environment("x", 1, 1, "bogus", p)
    with pytest.raises(ValueError):
        Environment("x", 1, 1, "obs", ((2, assemble(",.")),))
    rec = get_environment("alternation").record()
    assert rec["reward_range"] == "0..1" and rec["phases"] == "1:<+.>,"


def test_rewards():
    env = get_environment("match_previous")
    assert env.reward(ONE, ZERO, ONE) == 1 and env.reward(ONE, ONE, ZERO) == 0
    h = scripted_history(get_environment("constant"), [ONE, ZERO, ONE])
    assert h.total_reward() == 2 and h.k == 4
    a, o = h.encode()
    assert (a.bits, o.bits) == ("101", "111")


def test_empty_history_admits_the_empty_program():
    ms = consistent_models(History(get_environment("constant")), Budget(6, 1, 50))
    assert ms and ms[0].q == Program()


def test_constant_model_is_found():
    env = get_environment("constant")
    h = scripted_history(env, [ONE, ZERO, ONE, ONE])
    qs = [m.q.asm() for m in consistent_models(h, B)]
    assert "<+.," in qs


@pytest.mark.parametrize("name", ["constant", "alternation", "match_previous"])
def test_consistent_models_match_oracle_and_replay(name):
    env = get_environment(name)
    acts = [ONE, ZERO, ZERO, ONE]
    h = scripted_history(env, acts)
    mine = [m.q for m in consistent_models(h, Budget(12, 1, 200))]
    ref = consistent_oracle(env, [a.bits for a in acts], obs_of(env, acts), 12, 200)
    assert mine == ref
    from rmdl_lab.agent import replay_matches
    assert all(replay_matches(q, env, acts, h.observations(), 200) for q in mine)


EPISODES = {}


def episode(name, planner):
    key = (name, planner)
    if key not in EPISODES:
        EPISODES[key] = run_episode(get_environment(name), planner, 8, 3, B)
    return EPISODES[key]


@pytest.mark.parametrize("name", ["constant", "alternation", "match_previous"])
@pytest.mark.parametrize("planner", ["aixi", "best_model", "direct"])
def test_planners_match_oracle(name, planner):
    env = get_environment(name)
    log = episode(name, planner)
    acts, obs = [], []
    for s in log:
        want, _ = oracle_action(env, acts, obs, 3, 15, 200, single=(planner != "aixi"))
        assert s.action.bits == want, f"step {s.k}"
        acts.append(s.action.bits)
        obs.append(s.observation.bits)


def test_episode_rewards_frozen():
    assert [s.reward for s in episode("constant", "aixi")] == [0, 1, 0, 1, 1, 1, 1, 1]
    assert [s.reward for s in episode("alternation", "aixi")] == [0, 0, 1, 0, 1, 1, 1, 1]
    assert [s.reward for s in episode("alternation", "direct")] == [0, 0, 0, 1, 0, 1, 1, 1]
    assert [s.reward for s in episode("match_previous", "best_model")] == [1] * 8


def test_direct_first_action_equals_best_model():
    h = scripted_history(get_environment("alternation"), [ONE, ONE])
    plan = direct_action_search(h, 3, B)
    assert len(plan) == 3 and plan[0] == best_model_action(h, 3, B)
    for name in ["constant", "alternation", "match_previous"]:
        env = get_environment(name)
        for acts in product([ZERO, ONE], repeat=3):
            h = scripted_history(env, acts)
            ms = consistent_models(h, B)
            for k in (1, 2, 3):
                assert direct_plan(h, ms, k).action == single_model_decision(h, ms, k).action


def test_chain_count():
    h = scripted_history(get_environment("alternation"), [ONE, ZERO])
    ms = consistent_models(h, B)
    for k in range(0, 5):
        assert direct_plan(h, ms, k).chains_enumerated == (2 ** k if k else 0)


def test_zero_horizon_is_smallest_action():
    h = History(get_environment("alternation"))
    assert aixi_action(h, 0, B) == ZERO == best_model_action(h, 0, B)
    assert direct_action_search(h, 0, B) == ()


def test_mixture_collapses_to_single_model():
    env = get_environment("alternation")
    h = scripted_history(env, [ONE, ZERO, ONE])
    ms = consistent_models(h, B)
    for m in ms[:10]:
        for k in (1, 2, 3):
            assert mixture_decision(h, [m], k).action == single_model_decision(h, [m], k).action


def test_no_model_raises():
    h = scripted_history(get_environment("alternation"), [ONE] * 4)
    assert consistent_models(h, Budget(6, 1, 100)) == []
    with pytest.raises(BudgetExhausted):
        aixi_action(h, 2, Budget(6, 1, 100))
    with pytest.raises(BudgetExhausted):
        best_model_action(h, 2, Budget(6, 1, 100))
    with pytest.raises(BudgetExhausted):
        run_episode(get_environment("two_phase"), "direct", 6, 2, B)


# -- decomposition --------------------------------------------------------------

TWO_PHASE_ACTS = [ONE, ZERO, ONE, ZERO, ONE, ZERO]


@pytest.fixture(scope="module")
def two_phase_history():
    return scripted_history(get_environment("two_phase"), TWO_PHASE_ACTS)


def test_single_segment_is_shortest_model():
    env = get_environment("constant")
    h = scripted_history(env, [ONE, ZERO, ONE])
    seg = decomposed_models(h, Program(), Segmentation((0, 3)), B)
    assert seg[0].model == consistent_models(h, B)[0].q


def test_decomposition_economy(two_phase_history):
    joint = joint_model(two_phase_history, Program(), B)
    parts = decomposed_models(two_phase_history, Program(), Segmentation((0, 3, 6)), B)
    assert joint.model is None and joint.enumerated == 37449
    assert [p.model.asm() for p in parts] == ["<+.,", "<.,"]
    assert sum(p.enumerated for p in parts) == 912 < joint.enumerated
    mis = decomposed_models(two_phase_history, Program(), Segmentation((0, 2, 6)), B)
    assert mis[0].model is not None and mis[1].model is None


def test_measured_counts_equal_closed_forms(two_phase_history):
    m = measured_search_counts(two_phase_history, Segmentation((0, 3, 6)), 3, [9, 6], 200)
    assert (m["full"], m["decomposed"]) == search_cost_report(3, [9, 6]) == (262144, 4608)
    assert m["decomposed_solution"] == m["full_solution"] == "<|+.,,.,"
    m0 = measured_search_counts(two_phase_history, Segmentation((0, 3, 6)), 0, [3, 3], 200)
    assert (m0["full"], m0["decomposed"]) == search_cost_report(0, [3, 3])


def test_cost_report_examples():
    assert search_cost_report(2, [3, 3, 3]) == (2048, 96)
    assert search_cost_report(0, [5]) == (32, 32)
    with pytest.raises(ValueError):
        search_cost_report(1, [])


@given(st.integers(0, 6), st.lists(st.integers(1, 8), min_size=2, max_size=5))
def test_decomposed_is_cheaper(l_s, lengths):
    full, dec = search_cost_report(l_s, lengths)
    assert dec <= full
    # the one tie: two single-bit models, 2 + 2 == 2 * 2
    assert dec < full or sorted(lengths) == [1, 1]


@given(st.integers(0, 6), st.integers(0, 8))
def test_single_model_costs_agree(l_s, c):
    full, dec = search_cost_report(l_s, [c])
    assert full == dec == 2 ** (l_s + c)


def test_decomposed_episode_on_two_phase():
    log = run_episode(get_environment("two_phase"), "direct", 9, 3, Budget(15, 3, 200),
                      decompose=True)
    assert [s.reward for s in log] == [0, 1, 0, 1, 1, 1, 1, 1, 1]


# -- extrapolation ----------------------------------------------------------------

def test_constant_sequence_extrapolates():
    q = assemble(".")
    assert extrapolate_models([q, q, q], Budget(15, 10, 2000)) == q


def test_single_model_prediction_is_well_formed():
    p = extrapolate_models([assemble(".")], Budget(12, 6, 500))
    assert p is None or p.well_formed
    with pytest.raises(ValueError):
        extrapolate_models([], B)


# -- generalized actions -------------------------------------------------------

def macro_history_from(env, alphabet, symbols):
    mh = MacroHistory(env, alphabet)
    world = env.start()
    for s in symbols:
        obs, reward = "", 0
        for a in alphabet.macros[s.to_int()].expansion:
            p = world.step(a)
            obs += p.observation.bits
            reward += p.reward
        mh.record(s, BitString(obs), reward)
    return mh


@pytest.mark.parametrize("name", ["constant", "alternation", "match_previous"])
def test_identity_alphabet_equals_direct_search(name):
    env = get_environment(name)
    ident = MacroAlphabet.identity(env)
    for acts in product([ZERO, ONE], repeat=2):
        h = scripted_history(env, acts)
        mh = macro_history_from(env, ident, acts)
        for k in (1, 3):
            g = generalized_action_search(mh, k, B, h.last_obs())
            assert g.expansion == (direct_action_search(h, k, B)[0],)


THRICE = MacroAlphabet((GeneralizedAction("do-B-thrice", (ZERO,) * 3),
                        GeneralizedAction("do-A-thrice", (ONE,) * 3)))


def test_macro_alphabet_is_admissible():
    assert THRICE.block == 3 and THRICE.symbol_width == 1
    for slots in (1, 2, 3):
        assert THRICE.chain_count(slots) == 2 ** slots < 2 ** (3 * slots)
        assert THRICE.admissible(slots, 2)
    with pytest.raises(ValueError):
        GeneralizedAction("empty", ())


def test_macro_run_on_two_phase():
    env = get_environment("two_phase")
    log = run_macro_episode(env, THRICE, 3, 1, Budget(15, 3, 200), decompose=True)
    assert [s.reward for s in log] == [0, 3, 3]
    assert [s.chains_enumerated for s in log] == [2, 2, 2]
    # elementary planning over the same three-step span enumerates 2**3 chains per decision
    assert sum(s.chains_enumerated for s in log) == 6 < 9 * 2 ** 3
