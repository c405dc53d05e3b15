"""Batch experiment runner: YAML configs in, CSV reports out.

Precedence of settings, lowest first: built-in defaults, the config file,
command-line flags (``--output``, ``--workers`` and any number of
``--set dotted.key=value``).

Every report starts with one ``#`` header line carrying the schema version,
the command and the corpus seed, followed by an ordinary CSV table whose
first column is ``schema_version``. Wall-clock times never enter a report;
they go to a sidecar file ``<output>.timings.csv`` so that reports stay
byte-identical across reruns and worker counts.

Exit codes: 0 success, 1 usage or config error, 2 budget exhaustion (some
requested result was not found within its budget; the report is still
written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import yaml

from .agent import (BudgetExhausted, GeneralizedAction, MacroAlphabet,
                    decomposed_models, get_environment, joint_model, measured_search_counts,
                    run_episode, run_macro_episode, scripted_history, search_cost_report)
from .bits import BitString, parse_literal
from .complexity import Budget, approx_algorithmic_probability, approx_kolmogorov
from .hierarchy import (LevelStack, Segmentation, greedy_construct, resonance_refine,
                        segment_mdl, total_length)
from .machine import Program, assemble
from .representation import (EMPTY_REPRESENTATION, Corpus, corpus_score, search_representation,
                             sum_of_complexities)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2
COMMANDS = ("complexity", "represent", "hierarchy", "agent", "cost-report")

log = logging.getLogger("rmdl_lab")


class ConfigError(ValueError):
    """A config that cannot be run; maps to exit code 1."""


# -- report plumbing -----------------------------------------------------------

SCHEMAS: Dict[str, Tuple[str, ...]] = {
    "complexity": ("schema_version", "target", "found", "value_bits", "witness_code",
                   "witness_asm", "witness_data", "programs_enumerated", "mass",
                   "contributing_programs", "budget"),
    "represent": ("schema_version", "corpus", "row", "item", "target", "S", "S_asm", "l_S",
                  "mu", "mu_asm", "delta", "total", "corpus_score", "empty_score",
                  "sum_of_complexities", "gain", "candidates_considered"),
    "hierarchy": ("schema_version", "kind", "name", "alpha", "levels", "greedy_total",
                  "refined_total", "improvement", "refined_ranks", "detail",
                  "bounds", "n_segments", "content_bits"),
    "agent": ("schema_version", "kind", "name", "environment", "planner", "steps",
              "horizon", "decompose", "total_reward", "optimal_from",
              "chains_per_decision", "chains_total", "models_enumerated"),
    "cost-report": ("schema_version", "kind", "name", "l_S", "model_lengths", "full",
                    "decomposed", "solution"),
}


def rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class Report:
    command: str
    seed: Optional[int] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)
    timings: List[Tuple[int, str, float]] = field(default_factory=list)
    exhausted: List[str] = field(default_factory=list)
    episode_log: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, row: Dict[str, Any], label: str = "", seconds: float = 0.0) -> None:
        unknown = set(row) - set(SCHEMAS[self.command])
        if unknown:
            raise KeyError(f"columns {sorted(unknown)} not in the {self.command} schema")
        self.rows.append(dict(row, schema_version=SCHEMA_VERSION))
        self.timings.append((len(self.rows) - 1, label, seconds))

    def render(self) -> str:
        buf = io.StringIO()
        seed = "none" if self.seed is None else str(self.seed)
        buf.write(f"# rmdl-lab report schema_version={SCHEMA_VERSION} "
                  f"command={self.command} seed={seed}\n")
        w = csv.DictWriter(buf, fieldnames=SCHEMAS[self.command], lineterminator="\n",
                           restval="")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()

    def write(self, path: str) -> List[str]:
        """Write the report, its timing sidecar and (agent only) the episode
        log; returns the paths written."""
        paths = [path]
        _write_text(path, self.render())
        t = io.StringIO()
        w = csv.writer(t, lineterminator="\n")
        w.writerow(["row", "label", "seconds"])
        for i, label, s in self.timings:
            w.writerow([i, label, f"{s:.6f}"])
        _write_text(path + ".timings.csv", t.getvalue())
        paths.append(path + ".timings.csv")
        if self.episode_log:
            lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.episode_log)
            _write_text(episode_log_path(path), lines)
            paths.append(episode_log_path(path))
        return paths


def episode_log_path(report_path: str) -> str:
    return report_path + ".episodes.jsonl"


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return rational(v)
    return str(v)


def _write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_report(path: str) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    """Parse a report back into (header fields, rows)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# rmdl-lab report"):
            raise ValueError(f"{path}: not a report")
        meta = dict(tok.split("=", 1) for tok in first[1:].split() if "=" in tok)
        rows = list(csv.DictReader(fh))
    return meta, rows


# -- config ----------------------------------------------------------------------

def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    data["_base_dir"] = os.path.dirname(os.path.abspath(path))
    return data


def apply_override(cfg: Dict[str, Any], assignment: str) -> None:
    """``a.b.c=value``; the value is parsed as YAML (so ``3``, ``true`` and
    ``[1, 2]`` keep their types)."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"--set has an empty key: {assignment!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"--set {key}: bad value: {exc}") from None
    node = cfg
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set {key}: {p} is not a mapping")
        node = nxt
    node[parts[-1]] = value


def _get(cfg: Dict[str, Any], key: str, kind: type, default: Any = None) -> Any:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return default
    v = cfg[key]
    if kind is int and isinstance(v, bool) or not isinstance(v, kind):
        raise ConfigError(f"config key {key!r} must be {kind.__name__}, got {v!r}")
    return v


def parse_budget(d: Any, where: str = "budget") -> Budget:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a mapping with max_code_bits, max_data_bits, step_limit")
    missing = {"max_code_bits", "max_data_bits", "step_limit"} - set(d)
    if missing:
        raise ConfigError(f"{where} is missing {', '.join(sorted(missing))}")
    try:
        return Budget.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _literal(text: Any, where: str) -> BitString:
    if text == "" or text is None:
        return BitString()
    try:
        return parse_literal(str(text))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _asm(text: Any, where: str) -> Program:
    try:
        return assemble("" if text is None else str(text))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _resolve(cfg: Dict[str, Any], path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(cfg.get("_base_dir", os.getcwd()), path)


def generate_strings(seed: int, count: int, min_len: int, max_len: int) -> List[BitString]:
    """Seeded random bit strings; the only randomness in the harness."""
    if count < 0 or min_len < 0 or max_len < min_len:
        raise ConfigError("generate needs count >= 0 and 0 <= min_len <= max_len")
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(min_len, max_len)
        out.append(BitString("".join(rng.choice("01") for _ in range(n))))
    return out


def _generated(spec: Any, where: str) -> Tuple[List[BitString], int]:
    if not isinstance(spec, dict) or "seed" not in spec:
        raise ConfigError(f"{where}.generate needs a seed")
    seed = spec["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"{where}.generate.seed must be an integer")
    return generate_strings(seed, int(spec.get("count", 10)), int(spec.get("min_len", 1)),
                            int(spec.get("max_len", 6))), seed


def _corpus(cfg: Dict[str, Any], entry: Dict[str, Any], where: str) -> Tuple[Corpus, Optional[int]]:
    seed = None
    if "items" in entry:
        items = entry["items"]
        if not isinstance(items, list):
            raise ConfigError(f"{where}.items must be a list")
        strings = [_literal(x, f"{where}.items") for x in items]
    elif "file" in entry:
        path = _resolve(cfg, str(entry["file"]))
        if not os.path.exists(path):
            raise ConfigError(f"{where}: corpus file {path} does not exist")
        try:
            return Corpus.load(path), None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif "generate" in entry:
        strings, seed = _generated(entry["generate"], where)
    else:
        raise ConfigError(f"{where} needs one of items, file, generate")
    try:
        return Corpus(tuple(strings)), seed
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _named_list(cfg: Dict[str, Any], key: str) -> List[Dict[str, Any]]:
    v = cfg.get(key, [])
    if not isinstance(v, list) or not all(isinstance(e, dict) for e in v):
        raise ConfigError(f"{key} must be a list of mappings")
    return v


# -- commands ------------------------------------------------------------------

def run_complexity(cfg: Dict[str, Any], workers: int = 1) -> Report:
    budget = parse_budget(cfg.get("budget"))
    targets = cfg.get("targets")
    seed = None
    if targets is None and "generate" in cfg:
        strings, seed = _generated(cfg["generate"], "complexity")
    elif isinstance(targets, list):
        strings = [_literal(t, "targets") for t in targets]
    else:
        raise ConfigError("complexity needs a targets list or a generate block")
    want_mass = bool(cfg.get("probability", True))
    rep = Report("complexity", seed)
    for t in strings:
        t0 = time.perf_counter()
        est = approx_kolmogorov(t, budget, workers)
        row = {
            "target": t.to_literal(),
            "found": est.found,
            "value_bits": est.value_bits,
            "witness_code": est.witness_code.code.to_literal() if est.found else None,
            "witness_asm": est.witness_code.asm() if est.found else None,
            "witness_data": est.witness_data.to_literal() if est.found else None,
            "programs_enumerated": est.programs_enumerated,
            "budget": str(budget),
        }
        if want_mass:
            p = approx_algorithmic_probability(t, budget)
            row["mass"] = p.mass
            row["contributing_programs"] = p.contributing_programs
        if not est.found:
            rep.exhausted.append(f"no description of {t.to_literal()} within {budget}")
        rep.add(row, t.to_literal(), time.perf_counter() - t0)
    return rep


def run_representation(cfg: Dict[str, Any], workers: int = 1) -> Report:
    inner = parse_budget(cfg.get("budget"))
    max_rep = _get(cfg, "max_rep_bits", int)
    corpora = _named_list(cfg, "corpora")
    if not corpora:
        raise ConfigError("represent needs a non-empty corpora list")
    rep = Report("represent")
    for i, entry in enumerate(corpora):
        name = str(entry.get("name", f"corpus{i}"))
        corpus, seed = _corpus(cfg, entry, f"corpora[{i}]")
        if seed is not None:
            rep.seed = seed if rep.seed is None else rep.seed
        t0 = time.perf_counter()
        empty = corpus_score(EMPTY_REPRESENTATION, corpus, inner, workers)
        sk = sum_of_complexities(corpus, inner)
        rep.add({"corpus": name, "row": "empty_identity", "corpus_score": empty,
                 "sum_of_complexities": sk, "S": EMPTY_REPRESENTATION.__str__(), "l_S": 0},
                f"{name}/empty", time.perf_counter() - t0)
        t0 = time.perf_counter()
        res = search_representation(corpus, max_rep, inner, workers)
        if res is None:
            rep.exhausted.append(f"{name}: no representation within {max_rep} bits")
            rep.add({"corpus": name, "row": "not_found"}, f"{name}/search",
                    time.perf_counter() - t0)
            continue
        secs = time.perf_counter() - t0
        common = {"corpus": name, "S": str(res.rep), "S_asm": res.rep.code.asm(),
                  "l_S": res.rep.length_bits, "corpus_score": res.score,
                  "empty_score": res.empty_score, "gain": res.gain,
                  "candidates_considered": res.candidates_considered}
        rep.add(dict(common, row="summary", sum_of_complexities=sk), f"{name}/search", secs)
        for j, d in enumerate(res.descriptions):
            rep.add(dict(common, row="item", item=j, target=d.target.to_literal(),
                         mu=d.mu.code.to_literal(), mu_asm=d.mu.asm(),
                         delta=d.delta.to_literal(), total=d.total_bits))
    return rep


def _level_detail(h) -> str:
    return ";".join(f"{d.mu.asm() or '-'}/{d.delta.bits or '-'}" for d in h.levels)


def run_hierarchy(cfg: Dict[str, Any], workers: int = 1) -> Report:
    budget = parse_budget(cfg.get("budget"))
    beam = _get(cfg, "beam_width", int, 4)
    k = _get(cfg, "candidates_per_level", int, 3)
    rep = Report("hierarchy")
    jobs: List[Tuple[str, BitString, LevelStack, Budget]] = []
    for i, e in enumerate(_named_list(cfg, "instances")):
        stack = e.get("stack")
        if not isinstance(stack, list) or not stack:
            raise ConfigError(f"instances[{i}].stack must be a non-empty list of programs")
        st = LevelStack(tuple(_rep(s, f"instances[{i}].stack") for s in stack))
        b = parse_budget(e["budget"], f"instances[{i}].budget") if "budget" in e else budget
        jobs.append((str(e.get("name", f"instance{i}")),
                     _literal(e.get("alpha", ""), f"instances[{i}].alpha"), st, b))
    gen = cfg.get("generated")
    if gen is not None:
        if not isinstance(gen, dict) or not isinstance(gen.get("stack"), list):
            raise ConfigError("generated needs a stack list and a generate block")
        st = LevelStack(tuple(_rep(s, "generated.stack") for s in gen["stack"]))
        strings, seed = _generated(gen.get("generate"), "generated")
        rep.seed = seed
        gb = parse_budget(gen["budget"], "generated.budget") if "budget" in gen else budget
        jobs += [(f"gen{j}", a, st, gb) for j, a in enumerate(strings)]
    for name, alpha, st, budget_i in jobs:
        t0 = time.perf_counter()
        g = greedy_construct(alpha, st, budget_i)
        row = {"kind": "stack", "name": name, "alpha": alpha.to_literal(), "levels": len(st)}
        if g is None:
            rep.exhausted.append(f"{name}: no greedy description within {budget_i}")
            rep.add(row, name, time.perf_counter() - t0)
            continue
        r = resonance_refine(alpha, st, beam, k, budget_i)
        gt, rt = total_length(g), total_length(r)
        rep.add(dict(row, greedy_total=gt, refined_total=rt, improvement=gt - rt,
                     refined_ranks="-".join(map(str, r.ranks)), detail=_level_detail(r)),
                name, time.perf_counter() - t0)
    for i, e in enumerate(_named_list(cfg, "segment")):
        name = str(e.get("name", f"segment{i}"))
        alpha = _literal(e.get("alpha", ""), f"segment[{i}].alpha")
        rp = _rep(e.get("representation", ""), f"segment[{i}].representation")
        b = parse_budget(e["budget"], f"segment[{i}].budget") if "budget" in e else budget
        t0 = time.perf_counter()
        res = segment_mdl(alpha, rp, b, _get(e, "max_segments", int, 4), workers)
        row = {"kind": "segment", "name": name, "alpha": alpha.to_literal()}
        if res is None:
            rep.exhausted.append(f"{name}: no segmentation within {b}")
        else:
            row.update(bounds="|".join(map(str, res.segmentation.bounds)),
                       n_segments=res.segmentation.n_segments, content_bits=res.content_bits,
                       refined_total=res.total_bits,
                       detail=";".join(f"{d.mu.asm() or '-'}/{d.delta.bits or '-'}"
                                       for d in res.descriptions))
        rep.add(row, name, time.perf_counter() - t0)
    if not rep.rows:
        raise ConfigError("hierarchy needs instances, generated or segment entries")
    return rep


def _rep(text: Any, where: str):
    from .representation import Representation
    return Representation(_asm(text, where))


def optimal_from(rewards: Sequence[int], best: int) -> Optional[int]:
    """First 1-based step from which every reward equals ``best``."""
    k = len(rewards)
    while k > 0 and rewards[k - 1] == best:
        k -= 1
    return None if k == len(rewards) else k + 1


def _macro_alphabet(spec: Any, where: str) -> MacroAlphabet:
    if not isinstance(spec, list) or not spec:
        raise ConfigError(f"{where} must be a non-empty list of macros")
    macros = []
    for j, m in enumerate(spec):
        if not isinstance(m, dict) or "expansion" not in m:
            raise ConfigError(f"{where}[{j}] needs a name and an expansion list")
        exp = tuple(_literal(a, f"{where}[{j}].expansion") for a in m["expansion"])
        try:
            macros.append(GeneralizedAction(str(m.get("name", f"macro{j}")), exp))
        except ValueError as exc:
            raise ConfigError(f"{where}[{j}]: {exc}") from None
    return MacroAlphabet(tuple(macros))


def _env(name: Any, where: str):
    try:
        return get_environment(str(name))
    except KeyError as exc:
        raise ConfigError(f"{where}: {exc.args[0]}") from None


def run_agent(cfg: Dict[str, Any], workers: int = 1) -> Report:
    budget = parse_budget(cfg.get("budget"))
    rep = Report("agent")
    episodes = _named_list(cfg, "episodes")
    macro_runs = _named_list(cfg, "macro_episodes")
    if not episodes and not macro_runs:
        raise ConfigError("agent needs episodes or macro_episodes")
    for i, e in enumerate(episodes):
        env = _env(e.get("environment"), f"episodes[{i}]")
        planner = str(e.get("planner", "aixi"))
        if planner not in ("aixi", "best_model", "direct"):
            raise ConfigError(f"episodes[{i}]: unknown planner {planner!r}")
        steps = _get(e, "steps", int, 8)
        horizon = _get(e, "horizon", int, 3)
        decompose = bool(e.get("decompose", False))
        b = parse_budget(e["budget"], f"episodes[{i}].budget") if "budget" in e else budget
        name = str(e.get("name", f"{env.name}/{planner}"))
        row = {"kind": "episode", "name": name, "environment": env.name, "planner": planner,
               "steps": steps, "horizon": horizon, "decompose": decompose}
        t0 = time.perf_counter()
        try:
            steps_log = run_episode(env, planner, steps, horizon, b, decompose)
        except BudgetExhausted as exc:
            rep.exhausted.append(f"{name}: {exc}")
            rep.add(row, name, time.perf_counter() - t0)
            continue
        for s in steps_log:
            rep.episode_log.append(dict(s.record(), episode=name, kind="episode"))
        rewards = [s.reward for s in steps_log]
        chains = (len(env.actions()) ** horizon) if horizon else 0
        rep.add(dict(row, total_reward=steps_log[-1].cumulative if steps_log else 0,
                     optimal_from=optimal_from(rewards, env.reward_range[1]),
                     chains_per_decision=chains, chains_total=chains * steps,
                     models_enumerated=steps_log[-1].models_enumerated if steps_log else 0),
                name, time.perf_counter() - t0)
    for i, e in enumerate(macro_runs):
        env = _env(e.get("environment"), f"macro_episodes[{i}]")
        alphabet = _macro_alphabet(e.get("macros"), f"macro_episodes[{i}].macros")
        steps = _get(e, "macro_steps", int, 3)
        slots = _get(e, "slots", int, 1)
        decompose = bool(e.get("decompose", False))
        b = parse_budget(e["budget"], f"macro_episodes[{i}].budget") if "budget" in e else budget
        name = str(e.get("name", f"{env.name}/macro"))
        if not alphabet.admissible(slots, len(env.actions())):
            raise ConfigError(f"{name}: the macro alphabet yields more chains than "
                              f"elementary planning over the same span")
        row = {"kind": "macro", "name": name, "environment": env.name, "planner": "macro",
               "steps": steps, "horizon": slots, "decompose": decompose}
        t0 = time.perf_counter()
        try:
            mlog = run_macro_episode(env, alphabet, steps, slots, b, decompose)
        except BudgetExhausted as exc:
            rep.exhausted.append(f"{name}: {exc}")
            rep.add(row, name, time.perf_counter() - t0)
            continue
        for s in mlog:
            rep.episode_log.append({"episode": name, "kind": "macro", "k": s.k,
                                    "macro": s.macro, "observation": s.observations.to_literal(),
                                    "reward": s.reward, "cumulative_reward": s.cumulative,
                                    "consistent_models": s.models,
                                    "chains_enumerated": s.chains_enumerated})
        best = env.reward_range[1] * alphabet.block
        rep.add(dict(row, total_reward=mlog[-1].cumulative if mlog else 0,
                     optimal_from=optimal_from([s.reward for s in mlog], best),
                     chains_per_decision=alphabet.chain_count(slots),
                     chains_total=sum(s.chains_enumerated for s in mlog)),
                name, time.perf_counter() - t0)
    return rep


def _history(e: Dict[str, Any], where: str):
    env = _env(e.get("environment"), where)
    acts = e.get("actions")
    if not isinstance(acts, list) or not acts:
        raise ConfigError(f"{where}.actions must be a non-empty list of action literals")
    actions = [_literal(a, f"{where}.actions") for a in acts]
    if any(len(a) != env.action_width for a in actions):
        raise ConfigError(f"{where}: every action must be {env.action_width} bits")
    return scripted_history(env, actions)


def _segmentation(v: Any, where: str) -> Segmentation:
    try:
        return Segmentation(tuple(int(x) for x in v))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def run_cost_report(cfg: Dict[str, Any], workers: int = 1) -> Report:
    rep = Report("cost-report")
    for i, e in enumerate(_named_list(cfg, "closed_forms")):
        lengths = e.get("model_lengths")
        if not isinstance(lengths, list):
            raise ConfigError(f"closed_forms[{i}].model_lengths must be a list")
        try:
            full, dec = search_cost_report(int(e.get("l_S", 0)), [int(x) for x in lengths])
        except ValueError as exc:
            raise ConfigError(f"closed_forms[{i}]: {exc}") from None
        rep.add({"kind": "closed", "name": str(e.get("name", f"closed{i}")),
                 "l_S": e.get("l_S", 0), "model_lengths": "|".join(map(str, lengths)),
                 "full": full, "decomposed": dec})
    for i, e in enumerate(_named_list(cfg, "measured")):
        where = f"measured[{i}]"
        h = _history(e, where)
        seg = _segmentation(e.get("bounds"), f"{where}.bounds")
        lengths = [int(x) for x in e.get("model_lengths", [])]
        if any(x % 3 for x in lengths) or int(e.get("l_S", 0)) % 3:
            raise ConfigError(f"{where}: pinned lengths must be multiples of the opcode width 3")
        t0 = time.perf_counter()
        m = measured_search_counts(h, seg, int(e.get("l_S", 0)), lengths,
                                   int(e.get("step_limit", 200)))
        name = str(e.get("name", f"measured{i}"))
        closed = search_cost_report(int(e.get("l_S", 0)), lengths)
        rep.add({"kind": "measured", "name": name, "l_S": e.get("l_S", 0),
                 "model_lengths": "|".join(map(str, lengths)), "full": m["full"],
                 "decomposed": m["decomposed"],
                 "solution": m["decomposed_solution"] or "none"}, name, time.perf_counter() - t0)
        rep.add({"kind": "closed_check", "name": name, "l_S": e.get("l_S", 0),
                 "model_lengths": "|".join(map(str, lengths)), "full": closed[0],
                 "decomposed": closed[1]})
    for i, e in enumerate(_named_list(cfg, "searches")):
        where = f"searches[{i}]"
        h = _history(e, where)
        seg = _segmentation(e.get("bounds"), f"{where}.bounds")
        b = parse_budget(e.get("budget"), f"{where}.budget")
        prefix = _asm(e.get("representation", ""), f"{where}.representation")
        name = str(e.get("name", f"search{i}"))
        t0 = time.perf_counter()
        joint = joint_model(h, prefix, b)
        parts = decomposed_models(h, prefix, seg, b)
        rep.add({"kind": "joint_search", "name": name, "l_S": len(prefix),
                 "full": joint.enumerated,
                 "solution": joint.model.asm() if joint.model is not None else "none"},
                name, time.perf_counter() - t0)
        rep.add({"kind": "decomposed_search", "name": name, "l_S": len(prefix),
                 "model_lengths": "|".join(str(len(p.model)) if p.model is not None else "none"
                                           for p in parts),
                 "decomposed": sum(p.enumerated for p in parts),
                 "solution": ",".join(p.model.asm() if p.model is not None else "none"
                                      for p in parts)})
        if any(p.model is None for p in parts):
            rep.exhausted.append(f"{name}: a segment has no model within {b}")
    if not rep.rows:
        raise ConfigError("cost-report needs closed_forms, measured or searches entries")
    return rep


RUNNERS: Dict[str, Callable[[Dict[str, Any], int], Report]] = {
    "complexity": run_complexity,
    "represent": run_representation,
    "hierarchy": run_hierarchy,
    "agent": run_agent,
    "cost-report": run_cost_report,
}


# -- CLI ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmdl-lab",
                                description="Budgeted description-length experiments.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", "-c", help="YAML config file")
        s.add_argument("--output", "-o", help="report path (overrides config 'output')")
        s.add_argument("--workers", "-w", type=int, help="worker processes (overrides config)")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, dotted keys allowed; repeatable")
        s.add_argument("--verbose", "-v", action="count", default=0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        for assignment in args.set:
            apply_override(cfg, assignment)
        if args.output:
            cfg["output"] = os.path.abspath(args.output)
        if args.workers is not None:
            cfg["workers"] = args.workers
        output = cfg.get("output")
        if not output:
            raise ConfigError("no output path: set 'output' in the config or pass --output")
        workers = _get(cfg, "workers", int, 1)
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        report = RUNNERS[args.command](cfg, workers)
        paths = report.write(_resolve(cfg, str(output)))
    except ConfigError as exc:
        print(f"rmdl-lab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for p in paths:
        log.info("wrote %s", p)
    for msg in report.exhausted:
        print(f"rmdl-lab: budget exhausted: {msg}", file=sys.stderr)
    return EXIT_BUDGET if report.exhausted else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
