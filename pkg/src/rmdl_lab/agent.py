"""A toy universal agent over deterministic program environments.

Protocol
--------
An environment, and every model of one, is a *step program*: a code tape run
once per time step on a work tape that persists between steps (see
:class:`rmdl_lab.machine.Session`). At step ``t`` the data tape holds the
action ``y_t`` and the program must halt after reading exactly those bits,
writing exactly ``obs_width`` bits: the observation ``o_t``. The reward is a
declared function of ``(y_t, o_t, o_(t-1))``, so a model that predicts the
observations also predicts the rewards.

A model ``q`` is consistent with a history when this replay reproduces every
past observation. Consistency of a prefix of the history is implied by
consistency of the whole, so candidate sets are filtered step by step.

Planners
--------
* :func:`aixi_action` - expectimax over the mixture of consistent models,
  weights ``2**-len(q)`` renormalised over the set found.
* :func:`best_model_action` - the same recursion under the single shortest
  consistent model.
* :func:`direct_action_search` - enumerates every action chain under that
  model and returns the whole plan.

Ties go to the smaller action at every decision, which makes the chosen
chain the lexicographically smallest among the maximisers. ``horizon`` is the
number of steps planned; ``horizon = 0`` returns the all-zero action.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .bits import BitString, all_strings
from .complexity import Budget, approx_kolmogorov
from .hierarchy import Segmentation
from .machine import Program, Session, enumerate_programs, execute


class BudgetExhausted(RuntimeError):
    """No model (or no witness) exists within the configured budget."""


REWARD_RULES = ("obs", "match", "match_prev")


@dataclass(frozen=True)
class Percept:
    observation: BitString
    reward: int


@dataclass(frozen=True)
class Environment:
    """Declaration of a world.

    ``phases`` pairs a start step (1-based) with the program in force from
    that step on. Every phase program is fed every action from step 1, so a
    later phase sees the full action history.
    """

    name: str
    action_width: int
    obs_width: int
    reward_rule: str
    phases: Tuple[Tuple[int, Program], ...]
    step_limit: int = 1000

    def __post_init__(self):
        if self.reward_rule not in REWARD_RULES:
            raise ValueError(f"unknown reward rule {self.reward_rule!r}")
        if self.action_width < 1 or self.obs_width < 1:
            raise ValueError("action and observation widths must be >= 1")
        if self.reward_rule != "obs" and self.obs_width != self.action_width:
            raise ValueError("matching rewards need obs_width == action_width")
        if not self.phases or self.phases[0][0] != 1:
            raise ValueError("the first phase must start at step 1")
        starts = [s for s, _ in self.phases]
        if starts != sorted(set(starts)):
            raise ValueError("phase starts must be strictly increasing")

    @property
    def reward_range(self) -> Tuple[int, int]:
        if self.reward_rule == "obs":
            return 0, (1 << self.obs_width) - 1
        return 0, 1

    @property
    def boundaries(self) -> Tuple[int, ...]:
        """Step indices (0-based) where a new phase begins, after the first."""
        return tuple(s - 1 for s, _ in self.phases[1:])

    def actions(self) -> List[BitString]:
        return list(all_strings(self.action_width))

    def initial_obs(self) -> BitString:
        return BitString("0" * self.obs_width)

    def reward(self, action: BitString, obs: BitString, prev_obs: BitString) -> int:
        if self.reward_rule == "obs":
            return obs.to_int()
        if self.reward_rule == "match":
            return int(action == obs)
        return int(action == prev_obs)

    def start(self) -> "EnvironmentRun":
        return EnvironmentRun(self)

    def record(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "action_width": self.action_width,
            "obs_width": self.obs_width,
            "reward_range": "%d..%d" % self.reward_range,
            "reward_rule": self.reward_rule,
            "phases": ";".join(f"{s}:{p.asm()}" for s, p in self.phases),
        }


class EnvironmentRun:
    def __init__(self, env: Environment):
        self.env = env
        self.sessions = [Session(p, env.step_limit) for _, p in env.phases]
        self.t = 0
        self.prev_obs = env.initial_obs()

    def step(self, action: BitString) -> Percept:
        if len(action) != self.env.action_width:
            raise ValueError("action width mismatch")
        self.t += 1
        phase = max(i for i, (s, _) in enumerate(self.env.phases) if s <= self.t)
        obs = None
        for i, s in enumerate(self.sessions):
            r = s.cycle(action)
            if i == phase:
                if not r.halted or r.data_bits_read != len(action) or len(r.output) != self.env.obs_width:
                    raise RuntimeError(f"environment {self.env.name} failed at step {self.t}: {r}")
                obs = r.output
        reward = self.env.reward(action, obs, self.prev_obs)
        self.prev_obs = obs
        return Percept(obs, reward)


# -- built-in worlds ---------------------------------------------------------

def _p(asm: str) -> Program:
    from .machine import assemble
    return assemble(asm)


def builtin_environments() -> Dict[str, Environment]:
    return {
        "constant": Environment("constant", 1, 1, "match", ((1, _p("<+.,")),)),
        "alternation": Environment("alternation", 1, 1, "match", ((1, _p("<+.>,")),)),
        "match_previous": Environment("match_previous", 1, 1, "match_prev", ((1, _p(",.")),)),
        "two_phase": Environment("two_phase", 1, 1, "match",
                                 ((1, _p("<+.,")), (4, _p("<.,")))),
    }


def get_environment(name: str) -> Environment:
    envs = builtin_environments()
    if name not in envs:
        raise KeyError(f"unknown environment {name!r}; built-ins: {', '.join(sorted(envs))}")
    return envs[name]


# -- history -------------------------------------------------------------------

@dataclass(frozen=True)
class History:
    env: Environment
    actions: Tuple[BitString, ...] = ()
    percepts: Tuple[Percept, ...] = ()

    def __post_init__(self):
        if len(self.actions) != len(self.percepts):
            raise ValueError("actions and percepts must alternate")

    @property
    def k(self) -> int:
        """The current time step (1-based)."""
        return len(self.actions) + 1

    def __len__(self) -> int:
        return len(self.actions)

    def append(self, action: BitString, percept: Percept) -> "History":
        return History(self.env, self.actions + (action,), self.percepts + (percept,))

    def observations(self) -> Tuple[BitString, ...]:
        return tuple(p.observation for p in self.percepts)

    def last_obs(self) -> BitString:
        return self.percepts[-1].observation if self.percepts else self.env.initial_obs()

    def encode(self) -> Tuple[BitString, BitString]:
        """(action tape, observation tape) by fixed-width concatenation."""
        a = BitString("".join(x.bits for x in self.actions))
        o = BitString("".join(p.observation.bits for p in self.percepts))
        return a, o

    def total_reward(self) -> int:
        return sum(p.reward for p in self.percepts)


# -- models ----------------------------------------------------------------------

def _valid(r, action_width: int, obs_width: int) -> bool:
    return r.halted and r.data_bits_read == action_width and len(r.output) == obs_width


@dataclass
class EnvModel:
    """A program with its session replayed up to the end of the history."""

    q: Program
    session: Session = field(repr=False, compare=False)

    @property
    def length(self) -> int:
        return len(self.q)

    def predict(self, action: BitString, obs_width: int) -> Tuple[Optional[BitString], "EnvModel"]:
        """Observation for ``action`` (``None`` if the model fails) and the
        advanced model. The receiver is not modified."""
        s = self.session.copy()
        r = s.cycle(action)
        obs = r.output if _valid(r, len(action), obs_width) else None
        return obs, EnvModel(self.q, s)


def replay_matches(q: Program, env: Environment, actions: Sequence[BitString],
                   observations: Sequence[Optional[BitString]], step_limit: int) -> bool:
    """Fresh replay of ``q``; ``None`` observations are run but not checked."""
    s = Session(q, step_limit)
    for a, o in zip(actions, observations):
        r = s.cycle(a)
        if not _valid(r, env.action_width, env.obs_width):
            return False
        if o is not None and r.output != o:
            return False
    return True


class ModelPool:
    """The programs within budget that are consistent with a growing history,
    each carried with its live session. Kept in enumeration order."""

    def __init__(self, env: Environment, budget: Budget, prefix: Program = Program()):
        if budget.max_data_bits < env.action_width:
            raise ValueError("budget.max_data_bits must cover one action")
        self.env = env
        self.budget = budget
        self.prefix = prefix
        self.enumerated = 0
        self.models: List[EnvModel] = []
        for q in enumerate_programs(budget.max_code_bits):
            self.enumerated += 1
            code = prefix + q
            if code.well_formed:
                self.models.append(EnvModel(q, Session(code, budget.step_limit)))

    def observe(self, action: BitString, obs: BitString) -> None:
        kept = []
        for m in self.models:
            r = m.session.cycle(action)
            if _valid(r, self.env.action_width, self.env.obs_width) and r.output == obs:
                kept.append(m)
        self.models = kept

    def advance(self, action: BitString) -> None:
        """Run one step without checking the output (steps outside the
        segment being modelled); the run must still be clean."""
        kept = []
        for m in self.models:
            r = m.session.cycle(action)
            if _valid(r, self.env.action_width, self.env.obs_width):
                kept.append(m)
        self.models = kept

    def replay(self, history: History) -> "ModelPool":
        for a, p in zip(history.actions, history.percepts):
            self.observe(a, p.observation)
        return self

    def snapshot(self) -> List[EnvModel]:
        return [EnvModel(m.q, m.session.copy()) for m in self.models]


def consistent_models(history: History, budget: Budget) -> List[EnvModel]:
    """Every program within budget whose replay reproduces the observation
    history, in enumeration order (shortest first). Ill-formed codes never
    run and are left out."""
    return ModelPool(history.env, budget).replay(history).snapshot()


# -- planning -----------------------------------------------------------------------

def _weights(models: Sequence[EnvModel]) -> List[int]:
    top = max(m.length for m in models)
    return [1 << (top - m.length) for m in models]


def _expectimax(env: Environment, items: List[Tuple[int, EnvModel]], prev_obs: BitString,
                depth: int, actions: List[BitString]) -> Tuple[int, Tuple[int, ...]]:
    """Unnormalised value (sum of weight x reward) of the best policy and the
    action indices along the heaviest branch."""
    if depth == 0 or not items:
        return 0, ()
    best_v, best_line = -1, ()
    for ai, a in enumerate(actions):
        groups: Dict[str, List[Tuple[int, EnvModel]]] = {}
        for w, m in items:
            obs, nxt = m.predict(a, env.obs_width)
            if obs is not None:
                groups.setdefault(obs.bits, []).append((w, nxt))
        v = 0
        heaviest, heavy_w, heavy_line = None, -1, ()
        for ob in sorted(groups):
            g = groups[ob]
            o = BitString._raw(ob)
            gw = sum(w for w, _ in g)
            cv, cline = _expectimax(env, g, o, depth - 1, actions)
            v += gw * env.reward(a, o, prev_obs) + cv
            if gw > heavy_w:
                heavy_w, heavy_line = gw, cline
        if v > best_v:
            best_v, best_line = v, (ai,) + heavy_line
    return best_v, best_line


@dataclass(frozen=True)
class Decision:
    action: BitString
    value: Fraction
    models: int
    plan: Tuple[BitString, ...] = ()
    chains_enumerated: int = 0


def _zero_action(env: Environment) -> BitString:
    return BitString("0" * env.action_width)


def mixture_decision(history: History, models: Sequence[EnvModel], horizon: int) -> Decision:
    env = history.env
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if not models:
        raise BudgetExhausted("no consistent model within budget")
    if horizon == 0:
        return Decision(_zero_action(env), Fraction(0), len(models))
    acts = env.actions()
    ws = _weights(models)
    v, line = _expectimax(env, list(zip(ws, models)), history.last_obs(), horizon, acts)
    return Decision(acts[line[0]], Fraction(v, sum(ws)), len(models),
                    tuple(acts[i] for i in line))


def aixi_action(history: History, horizon: int, budget: Budget) -> BitString:
    return mixture_decision(history, consistent_models(history, budget), horizon).action


def best_model(models: Sequence[EnvModel]) -> EnvModel:
    """The shortest consistent model; enumeration order breaks ties."""
    if not models:
        raise BudgetExhausted("no consistent model within budget")
    return models[0]


def single_model_decision(history: History, models: Sequence[EnvModel], horizon: int) -> Decision:
    q = best_model(models)
    env = history.env
    if horizon == 0:
        return Decision(_zero_action(env), Fraction(0), len(models))
    v, line = _expectimax(env, [(1, q)], history.last_obs(), horizon, env.actions())
    acts = env.actions()
    return Decision(acts[line[0]], Fraction(v), len(models), tuple(acts[i] for i in line))


def best_model_action(history: History, horizon: int, budget: Budget) -> BitString:
    return single_model_decision(history, consistent_models(history, budget), horizon).action


def chain_reward(env: Environment, model: EnvModel, chain: Sequence[BitString],
                 prev_obs: BitString) -> int:
    total = 0
    for a in chain:
        obs, model = model.predict(a, env.obs_width)
        if obs is None:
            break
        total += env.reward(a, obs, prev_obs)
        prev_obs = obs
    return total


def direct_plan(history: History, models: Sequence[EnvModel], horizon: int) -> Decision:
    """Every chain of ``horizon`` actions under the shortest model, in
    lexicographic order; the first chain with the largest reward wins."""
    q = best_model(models)
    env = history.env
    if horizon == 0:
        return Decision(_zero_action(env), Fraction(0), len(models), (), 0)
    best, best_chain, n = -1, None, 0
    for chain in itertools.product(env.actions(), repeat=horizon):
        n += 1
        r = chain_reward(env, q, chain, history.last_obs())
        if r > best:
            best, best_chain = r, chain
    return Decision(best_chain[0], Fraction(best), len(models), tuple(best_chain), n)


def direct_action_search(history: History, horizon: int, budget: Budget) -> Tuple[BitString, ...]:
    return direct_plan(history, consistent_models(history, budget), horizon).plan


PLANNERS = {
    "aixi": mixture_decision,
    "best_model": single_model_decision,
    "direct": direct_plan,
}


# -- episodes ------------------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeStep:
    k: int
    action: BitString
    observation: BitString
    reward: int
    cumulative: int
    models: int
    models_enumerated: int
    best_model: str
    seconds: float = field(default=0.0, compare=False)

    def record(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "action": self.action.to_literal(),
            "observation": self.observation.to_literal(),
            "reward": self.reward,
            "cumulative_reward": self.cumulative,
            "consistent_models": self.models,
            "models_enumerated": self.models_enumerated,
            "best_model": self.best_model,
        }


def run_episode(env: Environment, planner: str, steps: int, horizon: int,
                budget: Budget, decompose: bool = False) -> List[EpisodeStep]:
    """Act for ``steps`` steps, refitting the consistent set after each.

    With ``decompose`` the model set restarts at every phase boundary of the
    environment: from then on models are fitted to the new segment only,
    while still being fed the whole action history.
    """
    decide = PLANNERS[planner]
    world = env.start()
    pool = ModelPool(env, budget)
    enumerated = pool.enumerated
    history = History(env)
    log: List[EpisodeStep] = []
    for _ in range(steps):
        t0 = time.perf_counter()
        if decompose and len(history) in env.boundaries:
            pool = ModelPool(env, budget)
            enumerated += pool.enumerated
            for a in history.actions:
                pool.advance(a)
        models = pool.snapshot()
        d = decide(history, models, horizon)
        percept = world.step(d.action)
        pool.observe(d.action, percept.observation)
        history = history.append(d.action, percept)
        log.append(EpisodeStep(history.k - 1, d.action, percept.observation, percept.reward,
                               history.total_reward(), len(models), enumerated,
                               models[0].q.asm() if models else "",
                               time.perf_counter() - t0))
    return log


def scripted_history(env: Environment, actions: Iterable[BitString]) -> History:
    world = env.start()
    h = History(env)
    for a in actions:
        h = h.append(a, world.step(a))
    return h


# -- decomposition ------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentModel:
    segment: Tuple[int, int]
    model: Optional[Program]
    enumerated: int


def _segment_obs(history: History, lo: int, hi: int) -> List[Optional[BitString]]:
    obs = history.observations()
    return [obs[t] if lo <= t < hi else None for t in range(hi)]


def shortest_model(history: History, prefix: Program, budget: Budget,
                   lo: int = 0, hi: Optional[int] = None) -> Tuple[Optional[Program], int]:
    """First program in enumeration order such that ``prefix + q`` replays
    the observations of steps ``lo..hi-1`` (0-based) from the full action
    history; earlier steps must run cleanly but are not checked. Returns the
    model and the number of programs enumerated."""
    hi = len(history) if hi is None else hi
    target = _segment_obs(history, lo, hi)
    acts = history.actions[:hi]
    n = 0
    for q in enumerate_programs(budget.max_code_bits):
        n += 1
        if replay_matches(prefix + q, history.env, acts, target, budget.step_limit):
            return q, n
    return None, n


def decomposed_models(history: History, rep: Program, seg: Segmentation,
                      budget: Budget) -> List[SegmentModel]:
    """Shortest model per segment, each searched on its own."""
    if seg.length != len(history):
        raise ValueError("segmentation must cover the history")
    out = []
    for lo, hi in zip(seg.bounds, seg.bounds[1:]):
        q, n = shortest_model(history, rep, budget, lo, hi)
        out.append(SegmentModel((lo, hi), q, n))
    return out


def joint_model(history: History, rep: Program, budget: Budget) -> SegmentModel:
    q, n = shortest_model(history, rep, budget)
    return SegmentModel((0, len(history)), q, n)


def search_cost_report(l_s: int, model_lengths: Sequence[int]) -> Tuple[int, int]:
    """Closed forms: full = 2**l_S * prod(2**l_i), decomposed = 2**l_S * sum(2**l_i)."""
    if not model_lengths:
        raise ValueError("need at least one model length")
    if l_s < 0 or any(l < 0 for l in model_lengths):
        raise ValueError("lengths must be >= 0")
    full = 1 << (l_s + sum(model_lengths))
    decomposed = (1 << l_s) * sum(1 << l for l in model_lengths)
    return full, decomposed


def _exact_length(bits: int) -> Iterator[Program]:
    for v in range(1 << bits):
        yield Program(BitString._raw(format(v, f"0{bits}b") if bits else ""))


def measured_search_counts(history: History, seg: Segmentation, l_s: int,
                           model_lengths: Sequence[int], step_limit: int) -> Dict[str, object]:
    """Exhaustive search with every length pinned: each ``S`` of exactly
    ``l_s`` bits, each segment model of exactly ``model_lengths[i]`` bits.

    The joint search walks the product of the per-segment spaces; the
    decomposed search walks each space once. Both count every candidate
    examined and report the first (in enumeration order) solution.
    """
    if len(model_lengths) != seg.n_segments:
        raise ValueError("one model length per segment")
    bounds = list(zip(seg.bounds, seg.bounds[1:]))
    full = decomposed = 0
    full_hit = dec_hit = None
    for S in _exact_length(l_s):
        ok: List[List[bool]] = []
        for (lo, hi), L in zip(bounds, model_lengths):
            target = _segment_obs(history, lo, hi)
            acts = history.actions[:hi]
            row = []
            for q in _exact_length(L):
                decomposed += 1
                row.append(replay_matches(S + q, history.env, acts, target, step_limit))
            ok.append(row)
        if dec_hit is None and all(any(r) for r in ok):
            dec_hit = (S, tuple(r.index(True) for r in ok))
        for combo in itertools.product(*[range(1 << L) for L in model_lengths]):
            full += 1
            if full_hit is None and all(ok[i][j] for i, j in enumerate(combo)):
                full_hit = (S, combo)

    def fmt(hit):
        if hit is None:
            return ""
        S, idx = hit
        qs = [Program(BitString.from_int(j, L)).asm() for j, L in zip(idx, model_lengths)]
        return S.asm() + "|" + ",".join(qs)

    return {"full": full, "decomposed": decomposed, "full_solution": fmt(full_hit),
            "decomposed_solution": fmt(dec_hit)}


# -- extrapolation -------------------------------------------------------------------

def extrapolate_models(models: Sequence[Program], budget: Budget) -> Optional[Program]:
    """Predict the next model in a sequence.

    The code strings are concatenated into one target and its best two-part
    description ``(mu, delta)`` is found. ``mu`` is then kept fixed and rerun
    with twice the step limit on the shortest residual (then lexicographically
    first) that makes it output the target followed by one more block, where
    a block is as long as the last model. That block, when it decodes to a
    well-formed program, is the prediction. Residuals up to
    ``budget.max_data_bits`` plus one block are tried.
    """
    if not models:
        raise ValueError("need at least one model")
    target = BitString("".join(m.code.bits for m in models))
    block = len(models[-1])
    est = approx_kolmogorov(target, budget)
    if not est.found:
        return None
    mu = est.witness_code
    limit = 2 * budget.step_limit
    for L in range(budget.max_data_bits + block + 1):
        for delta in all_strings(L):
            r = execute(mu, delta, limit)
            if (r.halted and r.data_bits_read == L and len(r.output) == len(target) + block
                    and r.output.bits.startswith(target.bits)):
                nxt = Program(r.output[len(target):])
                if nxt.well_formed:
                    return nxt
    return None


# -- generalized actions -----------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedAction:
    name: str
    expansion: Tuple[BitString, ...]

    def __post_init__(self):
        if not self.expansion:
            raise ValueError("a generalized action expands to at least one action")


@dataclass(frozen=True)
class MacroAlphabet:
    macros: Tuple[GeneralizedAction, ...]

    @property
    def symbol_width(self) -> int:
        return max(1, math.ceil(math.log2(len(self.macros))))

    def symbol(self, i: int) -> BitString:
        return BitString.from_int(i, self.symbol_width)

    @property
    def block(self) -> int:
        lens = {len(m.expansion) for m in self.macros}
        if len(lens) != 1:
            raise ValueError("macros must share one expansion length")
        return lens.pop()

    def chain_count(self, slots: int) -> int:
        return len(self.macros) ** slots

    def admissible(self, slots: int, n_actions: int) -> bool:
        """Planning ``slots`` macros must not enumerate more chains than
        planning their expansion elementarily."""
        return self.chain_count(slots) <= n_actions ** (slots * self.block)

    @classmethod
    def identity(cls, env: Environment) -> "MacroAlphabet":
        return cls(tuple(GeneralizedAction(a.bits, (a,)) for a in env.actions()))


def macro_environment(env: Environment, alphabet: MacroAlphabet) -> Environment:
    """The world as seen through the macros: one step per macro, the symbol
    as action, the expansion's observations concatenated as observation.
    Used only for its widths and reward bookkeeping."""
    return Environment(f"{env.name}/macro", alphabet.symbol_width,
                       env.obs_width * alphabet.block, "obs", env.phases, env.step_limit)


@dataclass(frozen=True)
class MacroStep:
    symbol: BitString
    observations: BitString
    reward: int


class MacroHistory:
    """History over generalized actions: symbol in, observation block out."""

    def __init__(self, env: Environment, alphabet: MacroAlphabet):
        self.env = env
        self.alphabet = alphabet
        self.steps: List[MacroStep] = []

    def record(self, symbol: BitString, observations: BitString, reward: int) -> None:
        self.steps.append(MacroStep(symbol, observations, reward))


def _macro_reward(env: Environment, alphabet: MacroAlphabet, sym: int, block_obs: str,
                  prev_obs: BitString) -> Tuple[int, BitString]:
    w = env.obs_width
    total = 0
    for j, a in enumerate(alphabet.macros[sym].expansion):
        o = BitString._raw(block_obs[j * w:(j + 1) * w])
        total += env.reward(a, o, prev_obs)
        prev_obs = o
    return total, prev_obs


def macro_models(mh: MacroHistory, budget: Budget) -> List[EnvModel]:
    """Programs that map each macro symbol to its block of observations."""
    menv = macro_environment(mh.env, mh.alphabet)
    pool = ModelPool(menv, budget)
    for st in mh.steps:
        pool.observe(st.symbol, st.observations)
    return pool.snapshot()


def generalized_plan(mh: MacroHistory, models: Sequence[EnvModel], slots: int,
                     prev_obs: BitString) -> Decision:
    """Chain search over macro symbols under the shortest consistent model."""
    q = best_model(models)
    env, alpha = mh.env, mh.alphabet
    width = env.obs_width * alpha.block
    if slots == 0:
        return Decision(alpha.symbol(0), Fraction(0), len(models), (), 0)
    best, best_chain, n = -1, None, 0
    for chain in itertools.product(range(len(alpha.macros)), repeat=slots):
        n += 1
        m, po, total = q, prev_obs, 0
        for sym in chain:
            obs, m = m.predict(alpha.symbol(sym), width)
            if obs is None:
                break
            r, po = _macro_reward(env, alpha, sym, obs.bits, po)
            total += r
        if total > best:
            best, best_chain = total, chain
    syms = tuple(alpha.symbol(i) for i in best_chain)
    return Decision(syms[0], Fraction(best), len(models), syms, n)


def generalized_action_search(mh: MacroHistory, slots: int, budget: Budget,
                              prev_obs: Optional[BitString] = None) -> GeneralizedAction:
    d = generalized_plan(mh, macro_models(mh, budget), slots,
                         prev_obs if prev_obs is not None else mh.env.initial_obs())
    return mh.alphabet.macros[d.action.to_int()]


@dataclass(frozen=True)
class MacroEpisodeStep:
    k: int
    macro: str
    observations: BitString
    reward: int
    cumulative: int
    models: int
    chains_enumerated: int


def run_macro_episode(env: Environment, alphabet: MacroAlphabet, macro_steps: int,
                      slots: int, budget: Budget, decompose: bool = False) -> List[MacroEpisodeStep]:
    world = env.start()
    mh = MacroHistory(env, alphabet)
    menv = macro_environment(env, alphabet)
    pool = ModelPool(menv, budget)
    bounds = {b // alphabet.block for b in env.boundaries if b % alphabet.block == 0}
    prev = env.initial_obs()
    total = 0
    log = []
    for k in range(1, macro_steps + 1):
        if decompose and k - 1 in bounds:
            pool = ModelPool(menv, budget)
            for st in mh.steps:
                pool.advance(st.symbol)
        models = pool.snapshot()
        d = generalized_plan(mh, models, slots, prev)
        sym = d.action.to_int()
        macro = alphabet.macros[sym]
        obs_bits, reward = "", 0
        for a in macro.expansion:
            p = world.step(a)
            obs_bits += p.observation.bits
            reward += p.reward
        prev = BitString._raw(obs_bits[-env.obs_width:])
        block = BitString._raw(obs_bits)
        pool.observe(d.action, block)
        mh.record(d.action, block, reward)
        total += reward
        log.append(MacroEpisodeStep(k, macro.name, block, reward, total, len(models),
                                    d.chains_enumerated))
    return log
