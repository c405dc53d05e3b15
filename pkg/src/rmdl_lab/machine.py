"""The reference machine: an eight-instruction tape machine with a read-only
data tape and a write-only output tape.

The normative description lives in ``docs/machine.md``. In short: code is a
sequence of 3-bit opcodes (MSB first), the work tape is a two-way unbounded
tape of integer cells initialised to zero, brackets are matched by nesting at
decode time, and running off the end of the code is a clean halt.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence, Tuple

from .bits import EMPTY, BitString

OPCODE_WIDTH = 3

LEFT, RIGHT, INC, DEC, JZ, JNZ, READ, OUT = range(8)

MNEMONICS = ("LEFT", "RIGHT", "INC", "DEC", "JZ", "JNZ", "READ", "OUT")
GLYPHS = "<>+-[],."

_BY_NAME = {name: op for op, name in enumerate(MNEMONICS)}
_BY_NAME.update({g: op for op, g in enumerate(GLYPHS)})
_OP_BITS = tuple(format(op, "03b") for op in range(8))


class Status(enum.Enum):
    HALTED = "Halted"
    STEP_LIMIT = "StepLimitExceeded"
    INVALID = "Invalid"

    def __str__(self) -> str:
        return self.value


def match_brackets(ops: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """Pair every JZ with its JNZ by nesting; ``None`` if any is unmatched.

    The result maps each bracket position to its partner (other slots -1).
    """
    match = [-1] * len(ops)
    stack = []
    for i, op in enumerate(ops):
        if op == JZ:
            stack.append(i)
        elif op == JNZ:
            if not stack:
                return None
            j = stack.pop()
            match[i], match[j] = j, i
    if stack:
        return None
    return tuple(match)


@dataclass(frozen=True, order=False)
class Program:
    """A code tape. Length must be a whole number of opcodes."""

    code: BitString = EMPTY

    def __post_init__(self):
        if not isinstance(self.code, BitString):
            object.__setattr__(self, "code", BitString(self.code))
        if len(self.code) % OPCODE_WIDTH:
            raise ValueError(f"code length {len(self.code)} is not a multiple of {OPCODE_WIDTH}")

    @classmethod
    def from_ops(cls, ops: Sequence[int]) -> "Program":
        return cls(BitString._raw("".join(_OP_BITS[op] for op in ops)))

    @cached_property
    def ops(self) -> Tuple[int, ...]:
        b = self.code.bits
        return tuple(int(b[i:i + 3], 2) for i in range(0, len(b), 3))

    @cached_property
    def brackets(self) -> Optional[Tuple[int, ...]]:
        return match_brackets(self.ops)

    @property
    def well_formed(self) -> bool:
        return self.brackets is not None

    def __len__(self) -> int:
        return len(self.code)

    def __add__(self, other: "Program") -> "Program":
        return Program(self.code + other.code)

    def __lt__(self, other: "Program") -> bool:
        return self.code < other.code

    def __str__(self) -> str:
        return self.code.to_literal()

    def asm(self) -> str:
        return disassemble(self)


def assemble(text: str) -> Program:
    """Build a program from mnemonics (``"INC JZ OUT JNZ"``) or glyphs (``"+[.]"``)."""
    text = text.strip()
    if not text:
        return Program()
    tokens = text.split() if any(c.isalpha() for c in text) else list(text.replace(" ", ""))
    try:
        return Program.from_ops([_BY_NAME[t.upper() if t.isalpha() else t] for t in tokens])
    except KeyError as exc:
        raise ValueError(f"unknown instruction {exc.args[0]!r}") from None


def disassemble(program: Program, glyphs: bool = True) -> str:
    if glyphs:
        return "".join(GLYPHS[op] for op in program.ops)
    return " ".join(MNEMONICS[op] for op in program.ops)


@dataclass(frozen=True)
class ExecResult:
    status: Status
    output: BitString
    steps_used: int
    data_bits_read: int

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED

    def describes(self, target: BitString, data: BitString) -> bool:
        """Halted, produced ``target`` and consumed all of ``data``."""
        return (self.status is Status.HALTED and self.output == target
                and self.data_bits_read == len(data))


def _run(ops: Sequence[int], match: Sequence[int], tape: list, head: int, data: str,
         step_limit: int) -> Tuple[Status, str, int, int, int]:
    """Interpreter core. Mutates ``tape``; returns (status, output, steps,
    data_read, head)."""
    n = len(ops)
    out = []
    pc = steps = dpos = 0
    while pc < n:
        if steps >= step_limit:
            return Status.STEP_LIMIT, "".join(out), steps, dpos, head
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
                pc = match[pc]
        elif op == JNZ:
            if tape[head] != 0:
                pc = match[pc]
        elif op == READ:
            if dpos >= len(data):
                return Status.INVALID, "".join(out), steps, dpos, head
            tape[head] = 1 if data[dpos] == "1" else 0
            dpos += 1
        else:
            out.append("1" if tape[head] & 1 else "0")
        pc += 1
    return Status.HALTED, "".join(out), steps, dpos, head


def execute(code: Program, data: BitString, step_limit: int) -> ExecResult:
    """Run ``code`` against ``data`` for at most ``step_limit`` instructions."""
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    match = code.brackets
    if match is None:
        return ExecResult(Status.INVALID, EMPTY, 0, 0)
    status, out, steps, dpos, _ = _run(code.ops, match, [0], 0, data.bits, step_limit)
    return ExecResult(status, BitString._raw(out), steps, dpos)


class Session:
    """One program run cycle after cycle on a persistent work tape.

    Each cycle starts at the first instruction with a fresh data tape and an
    empty output tape; the work tape and head carry over. This is how a
    program acts as a stateful transducer (an environment, or a model of one).
    """

    __slots__ = ("code", "step_limit", "tape", "head", "cycles")

    def __init__(self, code: Program, step_limit: int):
        if step_limit < 1:
            raise ValueError("step_limit must be >= 1")
        self.code = code
        self.step_limit = step_limit
        self.tape = [0]
        self.head = 0
        self.cycles = 0

    def cycle(self, data: BitString) -> ExecResult:
        match = self.code.brackets
        if match is None:
            return ExecResult(Status.INVALID, EMPTY, 0, 0)
        status, out, steps, dpos, self.head = _run(
            self.code.ops, match, self.tape, self.head, data.bits, self.step_limit)
        self.cycles += 1
        return ExecResult(status, BitString._raw(out), steps, dpos)

    def copy(self) -> "Session":
        other = Session(self.code, self.step_limit)
        other.tape = self.tape[:]
        other.head = self.head
        other.cycles = self.cycles
        return other


def execute_conditional(prefix: Program, code: Program, data: BitString, step_limit: int) -> ExecResult:
    """Run ``prefix`` followed by ``code`` on one code tape."""
    return execute(prefix + code, data, step_limit)


def enumerate_programs(max_code_bits: int, min_code_bits: int = 0) -> Iterator[Program]:
    """Every program with ``min_code_bits <= length <= max_code_bits``, by
    length then lexicographically."""
    if max_code_bits < 0:
        raise ValueError("max_code_bits must be >= 0")
    start = -(-min_code_bits // OPCODE_WIDTH)
    for k in range(start, max_code_bits // OPCODE_WIDTH + 1):
        width = OPCODE_WIDTH * k
        for v in range(1 << width):
            yield Program(BitString._raw(format(v, f"0{width}b") if width else ""))


def count_programs(max_code_bits: int) -> int:
    return sum(1 << (OPCODE_WIDTH * k) for k in range(max_code_bits // OPCODE_WIDTH + 1))
