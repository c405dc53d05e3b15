"""Multi-level descriptions, beam refinement across levels, and MDL
segmentation.

Level 1 describes the data string within ``S1`` as ``(mu1, delta1)``. Level
``i+1`` takes the code bits of ``mu_i`` as its target and describes them
within ``S(i+1)``; residuals are not passed upward. The length of the whole
stack is the chain sum

    total = len(delta_1) + ... + len(delta_m) + len(mu_m)

Greedy construction commits to the best description at each level in turn.
Refinement keeps the ``k`` best descriptions per level and runs a beam over
joint choices, so a worse level-1 model may win when its code compresses
better one level up.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .bits import EMPTY, BitString
from .complexity import Budget, Key, best_table
from .enumeration import DescriptionScan
from .machine import Program
from .representation import DescriptionWithin, Representation


@dataclass(frozen=True)
class LevelStack:
    representations: Tuple[Representation, ...]

    def __post_init__(self):
        object.__setattr__(self, "representations", tuple(self.representations))
        if not self.representations:
            raise ValueError("a level stack needs at least one level")

    @classmethod
    def of(cls, *asm: str) -> "LevelStack":
        return cls(tuple(Representation.from_asm(a) for a in asm))

    def __len__(self) -> int:
        return len(self.representations)


@dataclass(frozen=True)
class HierarchicalDescription:
    """One description per level; ``levels[i].target`` is the input of level
    ``i`` (the data string for level 0, the previous model's bits above)."""

    alpha: BitString
    stack: LevelStack
    levels: Tuple[DescriptionWithin, ...]
    ranks: Tuple[int, ...]

    @property
    def top_model(self) -> Program:
        return self.levels[-1].mu

    def replays(self, step_limit: int) -> bool:
        if not self.levels or self.levels[0].target != self.alpha:
            return False
        for i, (rep, d) in enumerate(zip(self.stack.representations, self.levels)):
            if not d.replays(rep, step_limit):
                return False
            if i + 1 < len(self.levels) and self.levels[i + 1].target != d.mu.code:
                return False
        return True


def total_length(h: HierarchicalDescription) -> int:
    return sum(len(d.delta) for d in h.levels) + len(h.top_model)


def _energy(levels: Sequence[DescriptionWithin]) -> int:
    return sum(len(d.delta) for d in levels) + len(levels[-1].mu)


@lru_cache(maxsize=4096)
def _ranked(budget: Budget, prefix: Program, target: str, k: int) -> Tuple[Key, ...]:
    """The ``k`` best descriptions of ``target`` within ``prefix``."""
    if k == 1:
        table, _ = best_table(budget, prefix, frozenset([target]))
        return (table[target],) if target in table else ()
    found: List[Key] = []
    DescriptionScan(budget.max_code_bits, budget.max_data_bits, budget.step_limit,
                    prefix=prefix, targets=[target]).run(
        lambda c, d, o: found.append((len(c) + len(d), len(c), c, d)))
    found.sort()
    return tuple(found[:k])


def level_candidates(rep: Representation, target: BitString, budget: Budget,
                     k: int) -> List[DescriptionWithin]:
    """The ``k`` best descriptions of ``target`` within ``rep`` under the
    shared order (total, code length, code, data)."""
    return [DescriptionWithin(target, Program(BitString._raw(c)), BitString._raw(d))
            for _, _, c, d in _ranked(budget, rep.code, target.bits, k)]


def greedy_construct(alpha: BitString, stack: LevelStack,
                     budget: Budget) -> Optional[HierarchicalDescription]:
    levels: List[DescriptionWithin] = []
    target = alpha
    for rep in stack.representations:
        cands = level_candidates(rep, target, budget, 1)
        if not cands:
            return None
        levels.append(cands[0])
        target = cands[0].mu.code
    return HierarchicalDescription(alpha, stack, tuple(levels), (0,) * len(levels))


def resonance_refine(alpha: BitString, stack: LevelStack, beam_width: int,
                     candidates_per_level: int, budget: Budget) -> HierarchicalDescription:
    """Beam search over joint per-level choices, minimising the chain total.

    Partial assignments are ranked by ``(energy so far, rank tuple)``; the
    rank tuple of the greedy path is all zeros, so greedy wins every tie and
    ``beam_width = candidates_per_level = 1`` reproduces it exactly. The
    greedy path is also compared against the beam's winner at the end.
    """
    if beam_width < 1 or candidates_per_level < 1:
        raise ValueError("beam_width and candidates_per_level must be >= 1")
    greedy = greedy_construct(alpha, stack, budget)
    if greedy is None:
        raise ValueError("resonance_refine needs a greedy solution")
    beam: List[Tuple[int, Tuple[int, ...], Tuple[DescriptionWithin, ...]]] = [(0, (), ())]
    for rep in stack.representations:
        grown = []
        for _, ranks, levels in beam:
            target = levels[-1].mu.code if levels else alpha
            for r, d in enumerate(level_candidates(rep, target, budget, candidates_per_level)):
                new = levels + (d,)
                grown.append((_energy(new), ranks + (r,), new))
        grown.sort(key=lambda g: (g[0], g[1]))
        beam = grown[:beam_width]
        if not beam:
            break
    best = greedy
    if beam:
        e, ranks, levels = beam[0]
        if (e, ranks) < (total_length(greedy), greedy.ranks):
            best = HierarchicalDescription(alpha, stack, levels, ranks)
    return best


def joint_minimum(alpha: BitString, stack: LevelStack, candidates_per_level: int,
                  budget: Budget) -> Optional[HierarchicalDescription]:
    """Exhaustive minimisation over every combination of per-level
    candidates (the beam with unlimited width)."""
    best: Optional[HierarchicalDescription] = None

    def walk(i: int, target: BitString, levels: Tuple[DescriptionWithin, ...],
             ranks: Tuple[int, ...]) -> None:
        nonlocal best
        if i == len(stack):
            h = HierarchicalDescription(alpha, stack, levels, ranks)
            if best is None or (total_length(h), ranks) < (total_length(best), best.ranks):
                best = h
            return
        rep = stack.representations[i]
        for r, d in enumerate(level_candidates(rep, target, budget, candidates_per_level)):
            walk(i + 1, d.mu.code, levels + (d,), ranks + (r,))

    walk(0, alpha, (), ())
    return best


# -- segmentation ------------------------------------------------------------

@dataclass(frozen=True)
class Segmentation:
    """Boundaries ``0 = m_1 < ... < m_n = len(alpha)``. The empty string has
    the single empty segment ``(0, 0)``."""

    bounds: Tuple[int, ...]

    def __post_init__(self):
        b = tuple(self.bounds)
        object.__setattr__(self, "bounds", b)
        if b == (0, 0):
            return
        if len(b) < 2 or b[0] != 0 or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError(f"bad segmentation bounds {b}")

    @property
    def n_segments(self) -> int:
        return len(self.bounds) - 1

    @property
    def length(self) -> int:
        return self.bounds[-1]

    def pieces(self, alpha: BitString) -> List[BitString]:
        if len(alpha) != self.length:
            raise ValueError("segmentation does not cover the string")
        return [alpha[i:j] for i, j in zip(self.bounds, self.bounds[1:])]


def cut_cost(n_segments: int, length: int) -> int:
    """Unary segment count plus each interior cut in ``ceil(log2(len+1))`` bits."""
    return n_segments + (n_segments - 1) * math.ceil(math.log2(length + 1))


@dataclass(frozen=True)
class SegmentResult:
    segmentation: Segmentation
    descriptions: Tuple[DescriptionWithin, ...]
    content_bits: int
    total_bits: int


SegmentCost = Callable[[str], Optional[int]]


def segment_dp(alpha: str, cost: SegmentCost,
               max_segments: int) -> Optional[Tuple[int, Tuple[int, ...]]]:
    """Minimise ``cut_cost + sum(cost(piece))`` over segmentations with at most
    ``max_segments`` pieces. Returns ``(total, bounds)``; ties go to fewer
    segments, then to the lexicographically smallest bounds."""
    if max_segments < 1:
        raise ValueError("max_segments must be >= 1")
    n = len(alpha)
    if n == 0:
        c = cost("")
        return None if c is None else (cut_cost(1, 0) + c, (0, 0))
    piece = [[None] * (n + 1) for _ in range(n + 1)]
    for i in range(n):
        for j in range(i + 1, n + 1):
            piece[i][j] = cost(alpha[i:j])
    # best[s][j]: (content, bounds) covering alpha[:j] with s pieces
    best: List[Dict[int, Tuple[int, Tuple[int, ...]]]] = [dict() for _ in range(max_segments + 1)]
    best[0][0] = (0, (0,))
    for s in range(1, max_segments + 1):
        for j in range(1, n + 1):
            cand = None
            for i, (c0, b0) in best[s - 1].items():
                if i >= j or piece[i][j] is None:
                    continue
                v = (c0 + piece[i][j], b0 + (j,))
                if cand is None or v < cand:
                    cand = v
            if cand is not None:
                best[s][j] = cand
    answer = None
    for s in range(1, max_segments + 1):
        if n in best[s]:
            c, b = best[s][n]
            v = (cut_cost(s, n) + c, s, b)
            if answer is None or v < answer:
                answer = v
    return None if answer is None else (answer[0], answer[2])


def segment_mdl(alpha: BitString, rep: Representation, budget: Budget,
                max_segments: int, workers: int = 1) -> Optional[SegmentResult]:
    """Best segmentation of ``alpha`` with each piece described within
    ``rep``. All piece costs come from one cached scan of the budget."""
    table, _ = best_table(budget, rep.code, None, workers)

    def cost(s: str) -> Optional[int]:
        k = table.get(s)
        return None if k is None else k[0]

    res = segment_dp(alpha.bits, cost, max_segments)
    if res is None:
        return None
    total, bounds = res
    seg = Segmentation(bounds)
    descs = []
    for piece in seg.pieces(alpha):
        k = table[piece.bits]
        descs.append(DescriptionWithin(piece, Program(BitString._raw(k[2])), BitString._raw(k[3])))
    content = sum(d.total_bits for d in descs)
    return SegmentResult(seg, tuple(descs), content, total)


def brute_force_segmentation(alpha: str, cost: SegmentCost,
                             max_segments: int) -> Optional[Tuple[int, Tuple[int, ...]]]:
    """Every cut set, scored directly; used as the reference for the DP."""
    n = len(alpha)
    if n == 0:
        c = cost("")
        return None if c is None else (cut_cost(1, 0) + c, (0, 0))
    answer = None
    for s in range(1, min(max_segments, n) + 1):
        for cuts in itertools.combinations(range(1, n), s - 1):
            b = (0,) + cuts + (n,)
            costs = [cost(alpha[i:j]) for i, j in zip(b, b[1:])]
            if any(c is None for c in costs):
                continue
            v = (cut_cost(s, n) + sum(costs), s, b)
            if answer is None or v < answer:
                answer = v
    return None if answer is None else (answer[0], answer[2])
