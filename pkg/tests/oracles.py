"""Reference implementations used only by the tests.

They share nothing with the package's search code beyond the interpreter
itself: no incremental trie scan, no pruning by target prefixes, no model
pools. Codes are visited longest first and in reverse order so that any
accidental dependence on enumeration order shows up as a mismatch.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from rmdl_lab.bits import BitString
from rmdl_lab.machine import Program, Session, Status, enumerate_programs, execute

Key = Tuple[int, int, str, str]


def _codes_reversed(max_code_bits: int) -> List[Program]:
    return [p for p in reversed(list(enumerate_programs(max_code_bits))) if p.well_formed]


def descriptions_of_code(code: Program, max_data_bits: int, step_limit: int):
    """Yield ``(data, output)`` for every data string (up to the limit) that
    ``code`` consumes exactly and halts on. Data is grown on demand: a run
    that reads past the end of its tape is retried with one more bit."""
    stack = [""]
    while stack:
        d = stack.pop()
        r = execute(code, BitString(d), step_limit)
        if r.status is Status.HALTED:
            if r.data_bits_read == len(d):
                yield d, r.output.bits
        elif r.status is Status.INVALID and r.data_bits_read == len(d) and len(d) < max_data_bits:
            stack.append(d + "1")
            stack.append(d + "0")


def best_table_oracle(max_code_bits: int, max_data_bits: int, step_limit: int,
                      prefix: Program = Program(),
                      max_output: Optional[int] = None) -> Dict[str, Key]:
    best: Dict[str, Key] = {}
    for mu in _codes_reversed(max_code_bits):
        full = prefix + mu
        if not full.well_formed:
            continue
        for d, out in descriptions_of_code(full, max_data_bits, step_limit):
            if max_output is not None and len(out) > max_output:
                continue
            key = (len(mu.code) + len(d), len(mu.code), mu.code.bits, d)
            if out not in best or key < best[out]:
                best[out] = key
    return best


def class_counts_oracle(max_code_bits: int, max_data_bits: int,
                        step_limit: int) -> Dict[Tuple[int, int], int]:
    counts: Dict[Tuple[int, int], int] = {}
    for code in _codes_reversed(max_code_bits):
        for d, _ in descriptions_of_code(code, max_data_bits, step_limit):
            c = (len(code), len(d))
            counts[c] = counts.get(c, 0) + 1
    return counts


# -- agent -------------------------------------------------------------------------

def _replay(code: Program, actions: Sequence[str], obs_width: int,
            step_limit: int) -> Optional[List[str]]:
    """Observations from a fresh session, or None once a cycle is not clean."""
    s = Session(code, step_limit)
    out = []
    for a in actions:
        r = s.cycle(BitString(a))
        if not (r.status is Status.HALTED and r.data_bits_read == len(a)
                and len(r.output) == obs_width):
            return None
        out.append(r.output.bits)
    return out


def consistent_oracle(env, actions: Sequence[str], observations: Sequence[str],
                      max_code_bits: int, step_limit: int) -> List[Program]:
    """Consistent programs sorted by (length, code)."""
    found = []
    for q in _codes_reversed(max_code_bits):
        got = _replay(q, actions, env.obs_width, step_limit)
        if got is not None and got == list(observations):
            found.append(q)
    found.sort(key=lambda p: (len(p), p.code.bits))
    return found


def _reward(env, a: str, o: str, prev: str) -> int:
    if env.reward_rule == "obs":
        return int(o, 2)
    if env.reward_rule == "match":
        return int(a == o)
    return int(a == prev)


def oracle_action(env, actions: Sequence[str], observations: Sequence[str], horizon: int,
                  max_code_bits: int, step_limit: int, single: bool) -> Tuple[str, Fraction]:
    """Expectimax by full enumeration: every consistent model is replayed from
    scratch along every action chain of the horizon. Weights ``2**-len(q)``
    normalised over the consistent set; ``single`` keeps only the first
    model in (length, code) order. Returns the first maximising root action
    and its value."""
    acts = ["".join(t) for t in product("01", repeat=env.action_width)]
    if horizon == 0:
        return acts[0], Fraction(0)
    models = consistent_oracle(env, actions, observations, max_code_bits, step_limit)
    if not models:
        raise LookupError("no consistent model")
    if single:
        models = models[:1]
    z = sum(Fraction(1, 2 ** len(q)) for q in models)
    weights = [Fraction(1, 2 ** len(q)) / z for q in models]
    # predictions along every chain, computed from scratch
    preds: Dict[Tuple[int, Tuple[str, ...]], Optional[List[str]]] = {}
    for i, q in enumerate(models):
        for chain in product(acts, repeat=horizon):
            got = _replay(q, list(actions) + list(chain), env.obs_width, step_limit)
            preds[i, chain] = None if got is None else got[len(actions):]
    prev0 = observations[-1] if observations else "0" * env.obs_width

    def pred_at(i: int, chain: Tuple[str, ...]) -> Optional[str]:
        # a chain prefix is predicted by any completion; pad with the first action
        full = chain + (acts[0],) * (horizon - len(chain))
        p = preds[i, full]
        if p is None:
            # the prefix may still be valid even if the padded tail fails
            got = _replay(models[i], list(actions) + list(chain), env.obs_width, step_limit)
            return None if got is None else got[-1]
        return p[len(chain) - 1]

    def value(chain: Tuple[str, ...], alive: Tuple[int, ...], prev: str) -> Fraction:
        if len(chain) == horizon or not alive:
            return Fraction(0)
        best = None
        for a in acts:
            nxt = chain + (a,)
            groups: Dict[str, List[int]] = {}
            for i in alive:
                o = pred_at(i, nxt)
                if o is not None:
                    groups.setdefault(o, []).append(i)
            v = Fraction(0)
            for o, members in groups.items():
                w = sum(weights[i] for i in members)
                v += w * _reward(env, a, o, prev) + value(nxt, tuple(members), o)
            if best is None or v > best:
                best = v
        return best

    best_a, best_v = None, None
    everyone = tuple(range(len(models)))
    for a in acts:
        groups: Dict[str, List[int]] = {}
        for i in everyone:
            o = pred_at(i, (a,))
            if o is not None:
                groups.setdefault(o, []).append(i)
        v = Fraction(0)
        for o, members in groups.items():
            w = sum(weights[i] for i in members)
            v += w * _reward(env, a, o, prev0) + value((a,), tuple(members), o)
        if best_v is None or v > best_v:
            best_a, best_v = a, v
    return best_a, best_v
