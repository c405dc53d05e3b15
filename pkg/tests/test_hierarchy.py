import pytest
from hypothesis import given, strategies as st

from oracles import best_table_oracle
from rmdl_lab.bits import BitString, all_strings
from rmdl_lab.complexity import Budget, approx_conditional
from rmdl_lab.harness import generate_strings
from rmdl_lab.hierarchy import (LevelStack, Segmentation, brute_force_segmentation, cut_cost,
                                greedy_construct, joint_minimum, level_candidates,
                                resonance_refine, segment_dp, segment_mdl, total_length)
from rmdl_lab.representation import Representation

STRICT_BUDGET = Budget(12, 4, 500)
STRICT_STACK = LevelStack.of("+", ",[...-...]")
COPY = ",[>,.<,]"
GEN_BUDGET = Budget(12, 9, 500)


def test_strict_two_level_instance():
    a = BitString("1")
    g = greedy_construct(a, STRICT_STACK, STRICT_BUDGET)
    r = resonance_refine(a, STRICT_STACK, 2, 2, STRICT_BUDGET)
    assert total_length(g) == 13 and [d.mu.asm() for d in g.levels] == [".", "+..."]
    assert total_length(r) == 1 and r.ranks == (1, 0)
    assert [d.mu.asm() for d in r.levels] == [".<", ""] and r.levels[1].delta.bits == "1"
    assert r.replays(STRICT_BUDGET.step_limit) and g.replays(STRICT_BUDGET.step_limit)
    j = joint_minimum(a, STRICT_STACK, 3, STRICT_BUDGET)
    assert total_length(j) == total_length(r)


def test_level_candidates_are_ranked():
    cands = level_candidates(Representation.from_asm("+"), BitString("1"), STRICT_BUDGET, 3)
    assert [c.mu.asm() for c in cands] == [".", ".<", ".>"]
    keys = [(c.total_bits, len(c.mu), c.mu.code.bits, c.delta.bits) for c in cands]
    assert keys == sorted(keys)


@pytest.fixture(scope="module")
def generated():
    return generate_strings(7, 24, 1, 4)


def test_refine_never_worse_on_generated(generated):
    st2 = LevelStack.of(COPY, COPY)
    n = 0
    for a in generated:
        g = greedy_construct(a, st2, GEN_BUDGET)
        assert g is not None
        r = resonance_refine(a, st2, 3, 3, GEN_BUDGET)
        assert total_length(r) <= total_length(g)
        assert r.replays(GEN_BUDGET.step_limit)
        n += 1
    assert n >= 20


@pytest.mark.parametrize("stack", [("+", ",[...-...]"), ("", ""), (",.", "")])
def test_unit_beam_is_greedy(stack, generated):
    st2 = LevelStack.of(*stack)
    for a in generated[:12]:
        g = greedy_construct(a, st2, STRICT_BUDGET)
        if g is None:
            with pytest.raises(ValueError):
                resonance_refine(a, st2, 1, 1, STRICT_BUDGET)
            continue
        assert resonance_refine(a, st2, 1, 1, STRICT_BUDGET) == g


def test_full_beam_equals_joint_minimum(generated):
    st2 = LevelStack.of(COPY, COPY)
    for a in generated[:8]:
        r = resonance_refine(a, st2, 9, 3, GEN_BUDGET)
        j = joint_minimum(a, st2, 3, GEN_BUDGET)
        assert (total_length(r), r.ranks) == (total_length(j), j.ranks)


def test_single_level_reduces_to_conditional():
    st1 = LevelStack.of(",")
    for t in ["0", "1", "00", "101"]:
        g = greedy_construct(BitString(t), st1, STRICT_BUDGET)
        est = approx_conditional(BitString(t), st1.representations[0].code, STRICT_BUDGET)
        if g is None:
            assert not est.found
            continue
        assert total_length(g) == est.value_bits
        assert resonance_refine(BitString(t), st1, 3, 3, STRICT_BUDGET) == g


def test_refine_argument_checks():
    with pytest.raises(ValueError):
        resonance_refine(BitString("1"), STRICT_STACK, 0, 1, STRICT_BUDGET)
    with pytest.raises(ValueError):
        LevelStack(())


# -- segmentation ------------------------------------------------------------------

def test_cut_cost():
    assert cut_cost(1, 10) == 1
    assert cut_cost(3, 12) == 3 + 2 * 4
    assert cut_cost(1, 0) == 1


def test_segmentation_validation():
    assert Segmentation((0, 0)).n_segments == 1
    with pytest.raises(ValueError):
        Segmentation((0, 3, 3))
    with pytest.raises(ValueError):
        Segmentation((1, 3))
    assert [p.bits for p in Segmentation((0, 2, 5)).pieces(BitString("00111"))] == ["00", "111"]


costs = st.dictionaries(st.text(alphabet="01", min_size=1, max_size=6),
                        st.one_of(st.none(), st.integers(0, 30)))


@given(st.text(alphabet="01", max_size=6), costs, st.integers(1, 4))
def test_dp_equals_brute_force_random_costs(alpha, table, k):
    def cost(s):
        return table.get(s, len(s) + 5)
    assert segment_dp(alpha, cost, k) == brute_force_segmentation(alpha, cost, k)


def test_empty_string_segmentation():
    assert segment_dp("", lambda s: 0, 3) == (1, (0, 0))
    assert segment_dp("", lambda s: None, 3) is None


SEG_BUDGET = Budget(15, 4, 2000)


@pytest.fixture(scope="module")
def copy_table():
    ref = best_table_oracle(15, 4, 2000, prefix=Representation.from_asm(",").code)
    return {k: v[0] for k, v in ref.items()}


def test_segment_mdl_matches_brute_force(copy_table):
    rep = Representation.from_asm(",")
    for L in range(0, 9):
        for a in all_strings(L):
            got = segment_mdl(a, rep, SEG_BUDGET, 4)
            ref = brute_force_segmentation(a.bits, copy_table.get, 4)
            if ref is None:
                assert got is None
                continue
            assert (got.total_bits, got.segmentation.bounds) == ref
            assert got.content_bits + cut_cost(got.segmentation.n_segments, L) == got.total_bits
            assert all(d.replays(rep, SEG_BUDGET.step_limit) for d in got.descriptions)


def test_block_boundary_is_found():
    res = segment_mdl(BitString("000000111111"), Representation(), SEG_BUDGET, 4)
    assert res.segmentation.bounds == (0, 4, 8, 12) and res.total_bits == 53


def test_parallel_segmentation_is_identical():
    a = BitString("0110100110")
    rep = Representation.from_asm(",")
    assert segment_mdl(a, rep, Budget(12, 4, 800), 4, workers=1) == \
        segment_mdl(a, rep, Budget(12, 4, 800), 4, workers=3)
