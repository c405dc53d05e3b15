"""Incremental enumeration of every halting (code, data) pair within a budget.

Walking programs one at a time repeats the work of every shared code prefix,
and trying every data tape repeats the work before the first READ. This module
walks the code trie instead. Each trie node carries the machine states that
have reached the end of its code ("frontier" states); appending an instruction
resumes those states rather than restarting. A READ forks a state on the two
possible values of the next unread data bit, so a state stands for every data
tape that begins with the bits it has consumed.

Three facts make this exact rather than heuristic:

* a run never looks at code beyond its program counter, except for a JZ whose
  partner lies further on; such a state enters *skip mode* and waits for the
  partner to be appended;
* a state that dies (step limit, read past the data budget, output rejected by
  the target filter) dies identically in every extension of the code, so the
  subtree below a node with no live states is empty;
* an unmatched JNZ is a decode error in every extension.

A frontier state at a node whose brackets are balanced is a completed run of
that code: it halted after consuming exactly the data it read, which is the
exact-consumption rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .machine import DEC, INC, JNZ, JZ, LEFT, OPCODE_WIDTH, OUT, READ, RIGHT, Program

# (tape, head, output, data_read, steps, skip_depth)
State = Tuple[list, int, str, str, int, int]
Visit = Callable[[str, str, str], None]


def _prefix_set(targets: Iterable[str]) -> frozenset:
    out = set()
    for t in targets:
        for i in range(len(t) + 1):
            out.add(t[:i])
    return frozenset(out)


@dataclass
class ScanStats:
    nodes: int = 0
    descriptions: int = 0


class DescriptionScan:
    """Enumerate every ``(mu, delta)`` with ``prefix + mu`` halting on ``delta``.

    ``max_code_bits`` bounds ``mu`` only; ``prefix`` is free. With ``targets``
    given, runs whose output stops being a prefix of some target are dropped,
    which is exact for any question about those targets.
    """

    def __init__(self, max_code_bits: int, max_data_bits: int, step_limit: int,
                 prefix: Program = Program(), targets: Optional[Iterable[str]] = None,
                 first_ops: Optional[Sequence[int]] = None):
        self.max_ops = max_code_bits // OPCODE_WIDTH
        self.max_data = max_data_bits
        self.step_limit = step_limit
        self.prefix_ops = list(prefix.ops)
        self.targets = None if targets is None else frozenset(targets)
        self.allowed = None if targets is None else _prefix_set(self.targets)
        # restrict the first mu instruction (used to partition work)
        self.first_ops = None if first_ops is None else tuple(first_ops)
        self.stats = ScanStats()

    # -- machine ---------------------------------------------------------

    def _advance(self, state: State, pc: int, ops: List[int], match: List[int],
                 open_jz: List[int], alive: List[State]) -> None:
        """Run ``state`` from ``pc`` until it reaches ``len(ops)`` or dies;
        survivors (including forks) are appended to ``alive``."""
        n = len(ops)
        limit = self.step_limit
        max_data = self.max_data
        allowed = self.allowed
        work = [(state, pc)]
        while work:
            (tape, head, out, dread, steps, _), pc = work.pop()
            dead = False
            while pc < n:
                if steps >= limit:
                    dead = True
                    break
                steps += 1
                op = ops[pc]
                if op == INC:
                    tape[head] += 1
                elif op == DEC:
                    tape[head] -= 1
                elif op == RIGHT:
                    head += 1
                    if head == len(tape):
                        tape.append(0)
                elif op == LEFT:
                    if head == 0:
                        tape.insert(0, 0)
                    else:
                        head -= 1
                elif op == JZ:
                    if tape[head] == 0:
                        partner = match[pc]
                        if partner < 0:
                            # partner not appended yet: wait in skip mode
                            depth = sum(1 for j in open_jz if j >= pc)
                            alive.append((tape, head, out, dread, steps, depth))
                            dead = True  # already parked
                            break
                        pc = partner
                elif op == JNZ:
                    if tape[head] != 0:
                        pc = match[pc]
                elif op == READ:
                    if len(dread) >= max_data:
                        dead = True
                        break
                    t1 = tape[:]
                    t1[head] = 1
                    work.append(((t1, head, out, dread + "1", steps, 0), pc + 1))
                    tape[head] = 0
                    dread += "0"
                else:
                    out += "1" if tape[head] & 1 else "0"
                    if allowed is not None and out not in allowed:
                        dead = True
                        break
                pc += 1
            if not dead:
                alive.append((tape, head, out, dread, steps, 0))

    def _extend(self, states: List[State], op: int, ops: List[int], match: List[int],
                open_jz: List[int]) -> List[State]:
        """Frontier states of ``ops`` (which already ends with ``op``)."""
        n = len(ops) - 1
        alive: List[State] = []
        for st in states:
            tape, head, out, dread, steps, skip = st
            if skip:
                if op == JZ:
                    skip += 1
                elif op == JNZ:
                    skip -= 1
                alive.append((tape, head, out, dread, steps, skip))
            else:
                self._advance((tape[:], head, out, dread, steps, 0), n, ops, match, open_jz, alive)
        return alive

    # -- trie walk -------------------------------------------------------

    def run(self, visit: Visit) -> ScanStats:
        """Call ``visit(mu_bits, data_bits, output_bits)`` for every completed
        run; returns node statistics."""
        ops: List[int] = []
        match: List[int] = []
        open_jz: List[int] = []
        states: List[State] = [([0], 0, "", "", 0, 0)]
        targets = self.targets
        stats = self.stats

        def push(op: int) -> bool:
            pos = len(ops)
            ops.append(op)
            match.append(-1)
            if op == JZ:
                open_jz.append(pos)
            elif op == JNZ:
                if not open_jz:
                    return False
                j = open_jz.pop()
                match[pos], match[j] = j, pos
            return True

        def pop(op: int, ok: bool) -> None:
            pos = len(ops) - 1
            if op == JZ:
                open_jz.pop()
            elif op == JNZ and ok:
                j = match[pos]
                match[j] = -1
                open_jz.append(j)
            ops.pop()
            match.pop()

        for op in self.prefix_ops:
            if not push(op):
                return stats
            states = self._extend(states, op, ops, match, open_jz)
            if not states:
                return stats
        base = len(ops)

        def node(states: List[State], mu: str) -> None:
            stats.nodes += 1
            if not open_jz:
                for _, _, out, dread, _, _ in states:
                    if targets is None or out in targets:
                        stats.descriptions += 1
                        visit(mu, dread, out)
            depth = len(ops) - base
            if depth >= self.max_ops:
                return
            choices = self.first_ops if depth == 0 and self.first_ops is not None else range(8)
            for op in choices:
                ok = push(op)
                if ok:
                    child = self._extend(states, op, ops, match, open_jz)
                    if child:
                        node(child, mu + _BITS[op])
                pop(op, ok)

        node(states, "")
        return stats


_BITS = tuple(format(op, "03b") for op in range(8))
