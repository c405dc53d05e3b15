"""Budget-bounded estimators on the reference machine: Kolmogorov complexity,
its conditional form, the best two-part code, and algorithmic probability.

Every estimator is a view over one scan of the (code, data) pairs within a
budget. A pair *describes* a string when the code halts on the data, reads all
of it, and outputs exactly that string. The description length of a pair is
``len(code) + len(data)``.

Ties between equally long descriptions are broken by shorter code, then
lexicographically smaller code, then lexicographically smaller data. Every
module in the package uses this order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .bits import EMPTY, BitString
from .enumeration import DescriptionScan
from .machine import OPCODE_WIDTH, Program, execute

# (total_bits, code_bits, code, data): the normative tie-break order
Key = Tuple[int, int, str, str]


def description_key(code: str, data: str) -> Key:
    return (len(code) + len(data), len(code), code, data)


@dataclass(frozen=True)
class Budget:
    max_code_bits: int
    max_data_bits: int
    step_limit: int

    def __post_init__(self):
        if self.max_code_bits < 0 or self.max_data_bits < 0:
            raise ValueError("budget sizes must be >= 0")
        if self.step_limit < 1:
            raise ValueError("step_limit must be >= 1")

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, int]) -> "Budget":
        return cls(int(d["max_code_bits"]), int(d["max_data_bits"]), int(d["step_limit"]))

    def replace(self, **kw) -> "Budget":
        d = self.to_dict()
        d.update(kw)
        return Budget.from_dict(d)

    def __str__(self) -> str:
        return f"({self.max_code_bits}, {self.max_data_bits}, {self.step_limit})"


@dataclass(frozen=True)
class ComplexityEstimate:
    """An upper bound on complexity with the pair that witnesses it."""

    target: BitString
    found: bool
    value_bits: Optional[int]
    witness_code: Optional[Program]
    witness_data: Optional[BitString]
    budget: Budget
    programs_enumerated: int = field(default=0, compare=False)

    def verify(self, prefix: Program = Program()) -> bool:
        if not self.found:
            return True
        r = execute(prefix + self.witness_code, self.witness_data, self.budget.step_limit)
        return (r.describes(self.target, self.witness_data)
                and self.value_bits == len(self.witness_code) + len(self.witness_data))


@dataclass(frozen=True)
class ProbabilityEstimate:
    target: BitString
    mass: Fraction
    contributing_programs: int
    budget: Budget

    @property
    def mass_literal(self) -> str:
        return f"{self.mass.numerator}/{self.mass.denominator}"


# -- scanning ------------------------------------------------------------

class _Best:
    """Reducer keeping the best description per output."""

    def __init__(self):
        self.best: Dict[str, Key] = {}

    def __call__(self, code: str, data: str, out: str) -> None:
        k = (len(code) + len(data), len(code), code, data)
        cur = self.best.get(out)
        if cur is None or k < cur:
            self.best[out] = k


def _partitions(workers: int) -> List[Optional[Tuple[int, ...]]]:
    if workers <= 1:
        return [None]
    groups: List[List[int]] = [[] for _ in range(min(workers, 8))]
    for op in range(8):
        groups[op % len(groups)].append(op)
    return [tuple(g) for g in groups]


def _scan_best(budget: Budget, prefix: Program, targets: Optional[FrozenSet[str]],
               first_ops: Optional[Tuple[int, ...]]) -> Tuple[Dict[str, Key], int]:
    red = _Best()
    scan = DescriptionScan(budget.max_code_bits, budget.max_data_bits, budget.step_limit,
                           prefix=prefix, targets=targets, first_ops=first_ops)
    stats = scan.run(red)
    return red.best, stats.nodes


def _merge_best(parts: Iterable[Tuple[Dict[str, Key], int]]) -> Tuple[Dict[str, Key], int]:
    best: Dict[str, Key] = {}
    nodes = 0
    for table, n in parts:
        nodes += n
        for out, k in table.items():
            cur = best.get(out)
            if cur is None or k < cur:
                best[out] = k
    return best, nodes


@lru_cache(maxsize=256)
def best_table(budget: Budget, prefix: Program = Program(),
               targets: Optional[FrozenSet[str]] = None, workers: int = 1) -> Tuple[Dict[str, Key], int]:
    """Best description of every reachable output (restricted to ``targets``
    when given), plus the number of code-trie nodes visited.

    With ``workers > 1`` the code space is split on the first instruction and
    scanned in separate processes; the merge is order-independent.
    """
    parts = _partitions(workers)
    if len(parts) == 1:
        return _scan_best(budget, prefix, targets, None)
    # the root node is visited by every partition; count it once
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_scan_best, [budget] * len(parts), [prefix] * len(parts),
                                [targets] * len(parts), parts))
    best, nodes = _merge_best(results)
    return best, nodes - (len(parts) - 1)


def _estimate(target: BitString, prefix: Program, budget: Budget, workers: int) -> ComplexityEstimate:
    table, nodes = best_table(budget, prefix, frozenset([target.bits]), workers)
    k = table.get(target.bits)
    if k is None:
        return ComplexityEstimate(target, False, None, None, None, budget, nodes)
    return ComplexityEstimate(target, True, k[0], Program(BitString._raw(k[2])),
                              BitString._raw(k[3]), budget, nodes)


def approx_kolmogorov(target: BitString, budget: Budget, workers: int = 1) -> ComplexityEstimate:
    """Shortest description of ``target`` within ``budget``."""
    return _estimate(target, Program(), budget, workers)


def approx_kolmogorov_batch(targets: Iterable[BitString], budget: Budget,
                            workers: int = 1) -> List[ComplexityEstimate]:
    """``approx_kolmogorov`` for many targets from one shared scan. Every
    estimate reports the node count of that shared scan."""
    targets = list(targets)
    table, nodes = best_table(budget, Program(), frozenset(t.bits for t in targets), workers)
    out = []
    for t in targets:
        k = table.get(t.bits)
        if k is None:
            out.append(ComplexityEstimate(t, False, None, None, None, budget, nodes))
        else:
            out.append(ComplexityEstimate(t, True, k[0], Program(BitString._raw(k[2])),
                                          BitString._raw(k[3]), budget, nodes))
    return out


def approx_conditional(target: BitString, prefix: Program, budget: Budget,
                       workers: int = 1) -> ComplexityEstimate:
    """Shortest ``(mu, delta)`` with ``prefix + mu`` describing ``target``.

    The prefix is free: ``value_bits`` counts ``mu`` and ``delta`` only, and
    ``budget.max_code_bits`` bounds ``mu``.
    """
    return _estimate(target, prefix, budget, workers)


def best_two_part(target: BitString, budget: Budget) -> Optional[Tuple[Program, BitString]]:
    """The model/residual split minimising total length, preferring the
    shorter model among equal totals."""
    est = approx_kolmogorov(target, budget)
    if not est.found:
        return None
    return est.witness_code, est.witness_data


def ranked_descriptions(target: BitString, budget: Budget,
                        prefix: Program = Program()) -> List[Tuple[Program, BitString]]:
    """Every description of ``target`` within budget, best first."""
    found: List[Key] = []

    def visit(code: str, data: str, out: str) -> None:
        found.append(description_key(code, data))

    DescriptionScan(budget.max_code_bits, budget.max_data_bits, budget.step_limit,
                    prefix=prefix, targets=[target.bits]).run(visit)
    found.sort()
    return [(Program(BitString._raw(k[2])), BitString._raw(k[3])) for k in found]


# -- algorithmic probability ----------------------------------------------

def approx_algorithmic_probability(target: BitString, budget: Budget) -> ProbabilityEstimate:
    """Sum of ``2**-(len(code)+len(data))`` over the pairs describing ``target``."""
    lengths: List[int] = []
    DescriptionScan(budget.max_code_bits, budget.max_data_bits, budget.step_limit,
                    targets=[target.bits]).run(lambda c, d, o: lengths.append(len(c) + len(d)))
    return ProbabilityEstimate(target, dyadic_sum(lengths), len(lengths), budget)


def dyadic_sum(lengths: Iterable[int]) -> Fraction:
    """Exact ``sum(2**-l)`` via one integer numerator over the largest power."""
    lengths = list(lengths)
    if not lengths:
        return Fraction(0)
    top = max(lengths)
    return Fraction(sum(1 << (top - l) for l in lengths), 1 << top)


@dataclass
class KraftCensus:
    """Counts of describing pairs per (code bits, data bits) class, and the
    mass each output receives, from one full scan.

    Under the exact-consumption rule the data tapes one code accepts form a
    prefix-free set, so each code's ``sum(2**-len(data))`` is at most 1 and
    each code-length class carries total mass at most 1.
    """

    budget: Budget
    class_counts: Dict[Tuple[int, int], int]
    masses: Dict[str, Fraction]
    code_kraft: Dict[str, Fraction]
    seconds: float = 0.0

    @property
    def total_mass(self) -> Fraction:
        return sum(self.masses.values(), Fraction(0))

    @staticmethod
    def class_bound(code_bits: int, data_bits: int) -> int:
        return 1 << (code_bits + data_bits)

    def violations(self) -> List[Tuple[int, int]]:
        return [c for c, n in self.class_counts.items() if n > self.class_bound(*c)]

    @property
    def class_mass_bound(self) -> Fraction:
        """Sum over classes of count * 2**-(k+d)."""
        return sum((Fraction(n, self.class_bound(*c)) for c, n in self.class_counts.items()),
                   Fraction(0))

    def mass_by_code_length(self) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for code, s in self.code_kraft.items():
            out[len(code)] = out.get(len(code), Fraction(0)) + s / (1 << len(code))
        return out

    @property
    def max_code_kraft(self) -> Fraction:
        return max(self.code_kraft.values(), default=Fraction(0))


def kraft_census(budget: Budget) -> KraftCensus:
    counts: Dict[Tuple[int, int], int] = {}
    per_out: Dict[str, List[int]] = {}
    per_code: Dict[str, List[int]] = {}

    def visit(code: str, data: str, out: str) -> None:
        c = (len(code), len(data))
        counts[c] = counts.get(c, 0) + 1
        per_out.setdefault(out, []).append(len(code) + len(data))
        per_code.setdefault(code, []).append(len(data))

    t0 = time.perf_counter()
    DescriptionScan(budget.max_code_bits, budget.max_data_bits, budget.step_limit).run(visit)
    masses = {o: dyadic_sum(ls) for o, ls in per_out.items()}
    kraft = {c: dyadic_sum(ls) for c, ls in per_code.items()}
    return KraftCensus(budget, counts, masses, kraft, time.perf_counter() - t0)


def code_bits_range(budget: Budget) -> range:
    return range(0, budget.max_code_bits + 1, OPCODE_WIDTH)
