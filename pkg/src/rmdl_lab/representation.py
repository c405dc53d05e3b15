"""Descriptions within a shared code prefix, corpus scores, and the search
for the prefix that makes a corpus cheapest to describe.

A *representation* ``S`` is a program prefix. A string ``a`` is described
within ``S`` by any ``(mu, delta)`` such that ``S + mu`` run on ``delta``
halts with output ``a`` after reading all of ``delta``. The prefix is paid
once per corpus:

    score(S, A) = len(S) + sum over a in A of min len(mu) + len(delta)
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .bits import BitString, parse_literal
from .complexity import Budget, Key, approx_kolmogorov, best_table
from .machine import OPCODE_WIDTH, Program, assemble, enumerate_programs, execute_conditional


@dataclass(frozen=True)
class Representation:
    code: Program = Program()

    @classmethod
    def from_asm(cls, text: str) -> "Representation":
        return cls(assemble(text))

    @property
    def length_bits(self) -> int:
        return len(self.code)

    def __str__(self) -> str:
        return self.code.code.to_literal()


EMPTY_REPRESENTATION = Representation()


@dataclass(frozen=True)
class DescriptionWithin:
    target: BitString
    mu: Program
    delta: BitString

    @property
    def total_bits(self) -> int:
        return len(self.mu) + len(self.delta)

    def replays(self, rep: Representation, step_limit: int) -> bool:
        r = execute_conditional(rep.code, self.mu, self.delta, step_limit)
        return r.describes(self.target, self.delta)


@dataclass(frozen=True)
class Corpus:
    """An ordered list of strings. Scores ignore order; reports keep it."""

    items: Tuple[BitString, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(BitString(a) for a in self.items))
        if not self.items:
            raise ValueError("a corpus needs at least one item")

    @classmethod
    def of(cls, *literals: str) -> "Corpus":
        return cls(tuple(parse_literal(s) if s else BitString() for s in literals))

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "Corpus":
        """One literal per line; blank lines and ``#`` comments are skipped."""
        items = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    items.append(parse_literal(text))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(tuple(items))

    def dump(self, path: Union[str, os.PathLike]) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for a in self.items:
                fh.write(a.to_literal() + "\n")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[BitString]:
        return iter(self.items)

    def __add__(self, other: "Corpus") -> "Corpus":
        return Corpus(self.items + other.items)

    def distinct(self) -> frozenset:
        return frozenset(a.bits for a in self.items)


def _within(key: Key, target: BitString) -> DescriptionWithin:
    return DescriptionWithin(target, Program(BitString._raw(key[2])), BitString._raw(key[3]))


def describe_within(rep: Representation, target: BitString, budget: Budget,
                    workers: int = 1) -> Optional[DescriptionWithin]:
    """Best ``(mu, delta)`` for ``target`` within ``rep``, or ``None``."""
    table, _ = best_table(budget, rep.code, frozenset([target.bits]), workers)
    key = table.get(target.bits)
    return None if key is None else _within(key, target)


def describe_corpus(rep: Representation, corpus: Corpus, budget: Budget,
                    workers: int = 1) -> Optional[List[DescriptionWithin]]:
    """Per-item best descriptions from a single scan, or ``None`` if any item
    has none."""
    table, _ = best_table(budget, rep.code, corpus.distinct(), workers)
    out = []
    for a in corpus:
        key = table.get(a.bits)
        if key is None:
            return None
        out.append(_within(key, a))
    return out


def is_representation(rep: Representation, corpus: Corpus, budget: Budget) -> bool:
    return describe_corpus(rep, corpus, budget) is not None


def corpus_score(rep: Representation, corpus: Corpus, budget: Budget,
                 workers: int = 1) -> Optional[int]:
    descs = describe_corpus(rep, corpus, budget, workers)
    if descs is None:
        return None
    return rep.length_bits + sum(d.total_bits for d in descs)


def sum_of_complexities(corpus: Corpus, budget: Budget) -> Optional[int]:
    """``sum(K(a))`` computed item by item through ``approx_kolmogorov``."""
    total = 0
    for a in corpus:
        est = approx_kolmogorov(a, budget)
        if not est.found:
            return None
        total += est.value_bits
    return total


# -- search ----------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    rep: Representation
    score: int
    descriptions: Tuple[DescriptionWithin, ...]
    empty_score: Optional[int]
    max_rep_bits: int
    inner: Budget
    candidates_considered: int = field(default=0, compare=False)

    @property
    def gain(self) -> Optional[int]:
        return None if self.empty_score is None else self.empty_score - self.score


def _bounded_score(rep_code: Program, targets: frozenset, corpus_bits: Tuple[str, ...],
                   inner: Budget, bound: int) -> Optional[int]:
    """Score of ``rep_code`` if it is below ``bound``; otherwise any value
    ``>= bound`` or ``None``.

    An item whose description costs ``t`` forces ``score >= len(S) + t``, so
    descriptions with ``mu`` or ``delta`` longer than ``bound - len(S) - 1``
    cannot take part in an improvement and are left out of the scan.
    """
    slack = bound - len(rep_code) - 1
    if slack < 0:
        return None
    b = Budget(min(inner.max_code_bits, slack - slack % OPCODE_WIDTH),
               min(inner.max_data_bits, slack), inner.step_limit)
    table, _ = best_table(b, rep_code, targets)
    total = len(rep_code)
    for a in corpus_bits:
        key = table.get(a)
        if key is None:
            return None
        total += key[0]
    return total


def _score_chunk(args) -> List[Optional[int]]:
    codes, targets, corpus_bits, inner, bound = args
    return [_bounded_score(Program(BitString._raw(c)), targets, corpus_bits, inner, bound)
            for c in codes]


def search_representation(corpus: Corpus, max_rep_bits: int, inner: Budget,
                          workers: int = 1, chunk: int = 64) -> Optional[SearchResult]:
    """Exhaustive minimisation of ``corpus_score`` over every ``S`` with
    ``len(S) <= max_rep_bits``.

    Candidates are visited in enumeration order (shorter first, then
    lexicographic) and only a strictly smaller score replaces the incumbent,
    which realises the tie-break. The walk stops once ``len(S)`` alone reaches
    the incumbent score. With ``workers > 1`` candidates are scored in
    ordered chunks against the bound in force at the start of the chunk; any
    score below that bound is exact, so the reduction matches the serial run.
    """
    if max_rep_bits < 0:
        raise ValueError("max_rep_bits must be >= 0")
    targets = corpus.distinct()
    corpus_bits = tuple(a.bits for a in corpus)
    empty = corpus_score(EMPTY_REPRESENTATION, corpus, inner)
    best_score = empty
    best_code = Program() if empty is not None else None
    bound = empty if empty is not None else _unbounded(corpus, inner, max_rep_bits)

    candidates = (p for p in enumerate_programs(max_rep_bits, min_code_bits=OPCODE_WIDTH)
                  if p.well_formed)
    considered = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        done = False
        while not done:
            batch: List[Program] = []
            for p in candidates:
                batch.append(p)
                if len(batch) >= (chunk * workers if pool else 1):
                    break
            if not batch:
                break
            if pool:
                codes = [p.code.bits for p in batch]
                parts = [codes[i:i + chunk] for i in range(0, len(codes), chunk)]
                scored = [s for part in pool.map(
                    _score_chunk, [(c, targets, corpus_bits, inner, bound) for c in parts])
                    for s in part]
            else:
                scored = [_bounded_score(batch[0], targets, corpus_bits, inner, bound)]
            for p, s in zip(batch, scored):
                if len(p) >= bound:
                    done = True
                    break
                considered += 1
                if s is not None and s < bound:
                    best_score, best_code, bound = s, p, s
    finally:
        if pool:
            pool.shutdown()

    if best_code is None:
        return None
    rep = Representation(best_code)
    descs = describe_corpus(rep, corpus, inner)
    assert descs is not None and rep.length_bits + sum(d.total_bits for d in descs) == best_score
    return SearchResult(rep, best_score, tuple(descs), empty, max_rep_bits, inner, considered)


def _unbounded(corpus: Corpus, inner: Budget, max_rep_bits: int) -> int:
    # larger than any achievable score
    return max_rep_bits + len(corpus) * (inner.max_code_bits + inner.max_data_bits) + 1


def rmdl_gain(corpus: Corpus, max_rep_bits: int, inner: Budget, workers: int = 1) -> int:
    """``sum(K(a)) - score(S*)``; requires every item to be describable alone."""
    res = search_representation(corpus, max_rep_bits, inner, workers)
    if res is None or res.empty_score is None:
        raise ValueError("rmdl_gain needs every corpus item describable with the empty prefix")
    return res.gain


def report_rows(res: SearchResult) -> List[Dict[str, object]]:
    """Flat rows: one per item, sharing the representation columns."""
    rows = []
    for i, d in enumerate(res.descriptions):
        rows.append({
            "item": i,
            "target": d.target.to_literal(),
            "S": str(res.rep),
            "S_asm": res.rep.code.asm(),
            "l_S": res.rep.length_bits,
            "mu": d.mu.code.to_literal(),
            "mu_asm": d.mu.asm(),
            "delta": d.delta.to_literal(),
            "total": d.total_bits,
            "corpus_score": res.score,
            "empty_score": "" if res.empty_score is None else res.empty_score,
            "gain": "" if res.gain is None else res.gain,
        })
    return rows
