"""The end-to-end pipeline: seed generation, the per-goal engine loop, and the store.

Engines never touch coverage directly.  Everything they produce goes through
one :class:`~hybrid_testgen.tracer.Tracer`, which replays it and prunes the
goal queue, and through one :class:`SharedStore`, which persists the results.
"""

from __future__ import annotations

import concurrent.futures
import enum
import hashlib
import json
import os
import random
import shutil
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .analysis import (ConsumedInputSize, Strategy, consumed_input_size, extract_ranges,
                       plan_loop_bounds, rank_goals, resolve_ranges)
from .bmc import BmcConfig, BmcStatus, BugReport, generate_bug_report, run_bmc
from .frontend import ast as A
from .frontend import parse, pretty_print
from .fuzz import FuzzBudget, run_fuzzer, run_selective_fuzzer
from .instrument import inject_goals
from .interpreter import OutcomeKind, execute
from .testcase import Provenance, Seed
from .tracer import Tracer


class Mode(str, enum.Enum):
    COVER_BRANCHES = "branches"
    COVER_ERROR = "error"


@dataclass
class BudgetPlan:
    """Engine budgets.

    Seconds apply when ``deterministic`` is false.  The iteration fields are
    always enforced as caps, and are the only limits in deterministic mode.
    ``fuzzer_s`` and ``bmc_s`` are totals shared out across the goal loop.
    """

    mode: Mode = Mode.COVER_BRANCHES
    seed_gen_s: float = 2.0
    fuzzer_s: float = 25.0
    bmc_s: float = 60.0
    selective_s: float = 3.0
    deterministic: bool = False
    seed_fuzz_iters: int = 2_000
    fuzz_iters: int = 5_000  # per goal
    bmc_nodes: int = 200_000  # per goal
    light_bmc_nodes: int = 20_000
    selective_iters: int = 5_000

    def __post_init__(self):
        self.mode = Mode(self.mode)
        for f in ("seed_gen_s", "fuzzer_s", "bmc_s", "selective_s", "seed_fuzz_iters",
                  "fuzz_iters", "bmc_nodes", "light_bmc_nodes", "selective_iters"):
            if getattr(self, f) <= 0:
                raise ValueError(f"budget {f} must be positive")

    @classmethod
    def defaults(cls, mode=Mode.COVER_BRANCHES, **kw) -> "BudgetPlan":
        mode = Mode(mode)
        if mode is Mode.COVER_ERROR:
            base = dict(fuzzer_s=20.0, bmc_s=65.0)
        else:
            base = dict(fuzzer_s=25.0, bmc_s=60.0)
        base.update(kw)
        return cls(mode=mode, **base)

    @classmethod
    def iterations(cls, mode=Mode.COVER_BRANCHES, **kw) -> "BudgetPlan":
        return cls.defaults(mode, deterministic=True, **kw)

    # Seed generation splits its time 1:3 between the fuzz pass and light BMC.
    @property
    def seed_fuzz_s(self) -> float:
        return self.seed_gen_s * 0.25

    @property
    def seed_bmc_s(self) -> float:
        return self.seed_gen_s * 0.75


@dataclass
class PipelineConfig:
    budget: BudgetPlan = field(default_factory=BudgetPlan)
    strategy: Strategy = Strategy.DEPTH_FIRST
    rng_seed: int = 0
    width: int = 32
    k: int = 8
    light_k: int = 2
    loop_cap: int = 64
    smart_seeds: bool = True  # False: primary seeds only (no light BMC, no fuzz-pass seeds)
    jobs: int = 1

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        if not 2 <= self.width <= 64:
            raise ValueError("width must lie in [2, 64]")
        if self.light_k > self.k:
            raise ValueError("light-mode unwind bound exceeds the full bound")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    @property
    def mode(self) -> Mode:
        return self.budget.mode

    @classmethod
    def from_dict(cls, data: dict, mode=None) -> "PipelineConfig":
        data = dict(data)
        budget = dict(data.pop("budget", {}))
        if mode is not None:
            budget["mode"] = Mode(mode)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        bknown = {f.name for f in fields(BudgetPlan)}
        if set(budget) - bknown:
            raise ValueError(f"unknown budget keys: {sorted(set(budget) - bknown)}")
        bmode = budget.pop("mode", Mode.COVER_BRANCHES)
        plan = BudgetPlan.defaults(bmode, **budget)
        return cls(budget=plan, **data)

    @classmethod
    def load(cls, path, mode=None) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return cls.from_dict(data, mode)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class SharedStore:
    """Directory-backed store; the pipeline holds the only writing handle.

    With ``root=None`` nothing is persisted, which is handy for tests.
    """

    def __init__(self, root: Optional[str] = None, clean: bool = True):
        self.root = root
        if root is not None:
            if clean and os.path.isdir(root):
                for name in ("seeds", "test-cases", "bug_reports"):
                    shutil.rmtree(os.path.join(root, name), ignore_errors=True)
                if os.path.exists(os.path.join(root, "audit.jsonl")):
                    os.remove(os.path.join(root, "audit.jsonl"))
            for sub in ("seeds", os.path.join("seeds", "incomplete"), "test-cases", "bug_reports"):
                os.makedirs(os.path.join(root, sub), exist_ok=True)

    def _path(self, *parts) -> str:
        return os.path.join(self.root, *parts)

    def write_text(self, name: str, text: str) -> None:
        if self.root is None:
            return
        tmp = self._path(name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, self._path(name))

    def write_json(self, name: str, obj) -> None:
        self.write_text(name, _dump(obj))

    def append_audit(self, entry: dict) -> None:
        if self.root is None:
            return
        with open(self._path("audit.jsonl"), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def read_json(self, name: str):
        with open(self._path(name), encoding="utf-8") as fh:
            return json.load(fh)


@dataclass
class PipelineResult:
    testcases: list
    bugs: list
    remaining: list
    covered: set
    tree: object
    program: A.MiniCProgram  # instrumented
    tracer: Tracer
    audit: list
    config: PipelineConfig
    unreachable: set = field(default_factory=set)

    @property
    def coverage(self) -> float:
        return len(self.covered) / len(self.tree.goals) if self.tree.goals else 1.0


class Pipeline:
    def __init__(self, source: str, config: Optional[PipelineConfig] = None,
                 store_dir: Optional[str] = None):
        self.source = source
        self.config = config or PipelineConfig()
        self.store = SharedStore(store_dir)
        self.audit: list = []
        self.bugs: list = []
        self._bug_keys: set = set()
        self.unreachable: set = set()  # goals refuted by an exhaustive BMC run
        self.rng = random.Random(self.config.rng_seed)

    # -- helpers --------------------------------------------------------------

    def _rng_for(self, tag: str, goal) -> random.Random:
        return random.Random(f"{self.config.rng_seed}:{tag}:{goal}")

    def _log(self, engine: str, goal, cost: int, outcome: str, phase: str, **extra) -> None:
        entry = {"seq": len(self.audit), "phase": phase, "engine": engine, "goal": goal,
                 "cost": cost, "outcome": outcome}
        entry.update(extra)
        self.audit.append(entry)
        self.store.append_audit(entry)

    def _trace(self, output, provenance: Provenance):
        case, trace, new = self.tracer.run(output, provenance)
        self.store.write_json(os.path.join("test-cases", case.id + ".json"),
                              dict(case.to_json(), goals_hit=list(trace.goals_hit)))
        if trace.outcome.kind is OutcomeKind.RUNTIME_FAULT:
            self._file_bug(case.values, provenance.value)
        return case, trace, new

    def _file_bug(self, values, source: str) -> Optional[BugReport]:
        report = generate_bug_report(self.program, values, self.config.width, source)
        if report.kind not in ("ReachError", "RuntimeFault") or report.key in self._bug_keys:
            return None
        self._bug_keys.add(report.key)
        self.bugs.append(report)
        self.store.write_json(os.path.join("bug_reports", f"bug-{len(self.bugs):03d}.json"),
                              report.to_json())
        return report

    def _note_refuted(self, gid, r) -> None:
        """A failure that cut no path explored every execution: the goal is dead."""
        if r.status is BmcStatus.FAILURE and r.witness is None and r.paths_cut == 0:
            self.unreachable.add(gid)
            self.tracer.queue = [g for g in self.tracer.queue if g != gid]

    def _stop_on_bug(self) -> bool:
        return self.config.mode is Mode.COVER_ERROR and any(b.kind == "ReachError" for b in self.bugs)

    def _fuzz_budget(self, iters: int, seconds: Optional[float]) -> FuzzBudget:
        b = self.config.budget
        return FuzzBudget.for_consumed(self.tracer.consumed.values, iterations=iters,
                                       seconds=None if b.deterministic else seconds)

    def _fuzz_seeds(self) -> list:
        seeds = list(self.tracer.seeds)
        if not self.config.smart_seeds:
            seeds = [s for s in seeds if s.provenance is Provenance.PRIMARY]
        seeds.sort(key=lambda s: (not s.smart, -s.deepest_depth, -s.unique_goals, s.order))
        return seeds + [s for s in self.primary if s not in seeds]

    def _absorb_fuzz(self, res, phase: str, goal) -> None:
        for case in res.testcases:
            self._trace(case, case.provenance)
        for values, _site in res.errors:
            self._file_bug(values, "fuzzer")
        if self.config.smart_seeds:
            for s in res.seeds:
                self.tracer.seeds.add(Seed(s.values, s.provenance, s.deepest_depth, 0, smart=True,
                                           goals=s.goals))

    # -- phases ---------------------------------------------------------------

    def analyse(self) -> None:
        cfg = self.config
        self.original = parse(self.source)
        self.program, self.tree = inject_goals(self.original)
        self.ranges = extract_ranges(self.program, cfg.width)
        self.ranked = [g.id for g in rank_goals(self.tree, cfg.strategy)]
        self.loop_plan = plan_loop_bounds(self.program, cap=cfg.loop_cap)
        self.tracer = Tracer(self.program, self.tree, self.ranges, self.ranked,
                             random.Random(f"{cfg.rng_seed}:complete"), cfg.width)
        probe = execute(self.program, (), width=cfg.width, loop_caps=self.loop_plan.caps())
        self.probe = probe
        self.tracer.consumed = consumed_input_size(probe, cfg.width)
        self.store.write_text("instrumented.c", pretty_print(self.program))
        self.store.write_json("goals.json", self.tree.to_json())
        self.store.write_json("goal_queue.json", self.ranked)
        self.store.write_json("ranges.json", [r.to_json() for r in self.ranges])
        self._checkpoint()

    def primary_seeds(self) -> list:
        n = self.tracer.consumed.values
        kinds = self.probe.read_types
        pos_ranges = resolve_ranges(self.ranges, self.probe.read_sites, n, self.config.width)
        rng = self._rng_for("primary", "")
        patterns = [
            tuple(0 for _ in range(n)),
            tuple(1 for _ in range(n)),
            tuple(r.sample(rng) for r in pos_ranges),
        ]
        seeds, seen = [], set()
        for values in patterns:
            values = tuple(min(v, 1) if k == A.BOOL else v for v, k in zip(values, kinds))
            if values not in seen:
                seen.add(values)
                seeds.append(Seed(values, Provenance.PRIMARY))
        return seeds

    def generate_seeds(self) -> None:
        cfg, b = self.config, self.config.budget
        self.primary = self.primary_seeds()
        for s in self.primary:
            self.tracer.seeds.add(Seed(s.values, Provenance.PRIMARY))
        res = run_fuzzer(self.program, self.tree, self.primary,
                         self._fuzz_budget(b.seed_fuzz_iters, b.seed_fuzz_s), self.ranges,
                         rng=self._rng_for("seed-fuzz", ""), width=cfg.width,
                         loop_plan=self.loop_plan, known=self.tracer.covered)
        self._log("fuzzer", None, res.iterations, f"covered {len(res.covered)}", "seed-gen")
        if cfg.smart_seeds:
            self._absorb_fuzz(res, "seed-gen", None)
        else:
            for case in res.testcases:
                self._trace(case, case.provenance)
            for values, _site in res.errors:
                self._file_bug(values, "fuzzer")
        if cfg.smart_seeds:
            share = b.seed_bmc_s / max(1, len(self.ranked))
            for gid in list(self.ranked):
                if gid in self.tracer.covered:
                    continue
                bcfg = BmcConfig.light(k=cfg.light_k, node_budget=b.light_bmc_nodes,
                                       seconds=None if b.deterministic else share)
                r = run_bmc(self.program, gid, bcfg, self.tree, cfg.width)
                self._log("bmc-light", gid, r.nodes, r.status.value, "seed-gen")
                if r.status is BmcStatus.SUCCESS:
                    _case, trace, _new = self._trace(r.witness, Provenance.BMC)
                    if trace.reached_error:
                        self._file_bug(r.witness, "bmc-light")
                self._note_refuted(gid, r)
        self._checkpoint()

    def _run_goal_bmc(self, gid) -> None:
        cfg, b = self.config, self.config.budget
        goals_left = max(1, len(self.tracer.queue))
        bcfg = BmcConfig(k=cfg.k, node_budget=b.bmc_nodes,
                         seconds=None if b.deterministic else b.bmc_s / goals_left,
                         check_errors=cfg.mode is Mode.COVER_ERROR)
        r = run_bmc(self.program, gid, bcfg, self.tree, cfg.width)
        self._log("bmc", gid, r.nodes, r.status.value, "main",
                  covered_at_call=gid in self.tracer.covered)
        self._note_refuted(gid, r)
        w = r.witness
        if r.status is BmcStatus.SUCCESS:
            _case, trace, _new = self._trace(w, Provenance.BMC)
            if trace.reached_error:
                self._file_bug(w, "bmc")
        elif r.status is BmcStatus.FAILURE and w is not None:
            self._file_bug(w, "bmc")
            self._trace(w, Provenance.BMC)
        elif w is not None:
            self.store.write_json(os.path.join("seeds", "incomplete", f"goal-{gid:04d}.json"), w.to_json())
            self._trace(w, Provenance.TRACER_COMPLETED)

    def _fuzz_goal(self, gid, rng):
        b = self.config.budget
        goals_left = max(1, len(self.tracer.queue))
        return run_fuzzer(self.program, self.tree, self._fuzz_seeds(),
                          self._fuzz_budget(b.fuzz_iters, b.fuzzer_s / goals_left), self.ranges,
                          target_goal=gid, rng=rng, width=self.config.width,
                          loop_plan=self.loop_plan, known=set(self.tracer.covered))

    def main_loop(self) -> None:
        jobs = self.config.jobs
        processed: set = set()
        while not self._stop_on_bug():
            batch = [g for g in self.tracer.queue if g not in processed and g not in self.unreachable][:jobs]
            if not batch:
                break
            processed.update(batch)
            if jobs == 1:
                results = [self._fuzz_goal(batch[0], self._rng_for("fuzz", batch[0]))]
            else:
                with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
                    futs = [pool.submit(self._fuzz_goal, g, self._rng_for("fuzz", g)) for g in batch]
                    results = [f.result() for f in futs]
            for gid, res in zip(batch, results):
                self._log("fuzzer", gid, res.iterations, "covered" if gid in res.covered else "uncovered",
                          "main")
                self._absorb_fuzz(res, "main", gid)
            for gid in batch:
                if self._stop_on_bug():
                    break
                if gid in self.tracer.covered:
                    continue
                self._run_goal_bmc(gid)
            self._checkpoint()

    def selective(self) -> None:
        if not self.tracer.queue or self._stop_on_bug():
            return
        b = self.config.budget
        budget = self._fuzz_budget(b.selective_iters, b.selective_s)
        res = run_selective_fuzzer(self.program, self.tracer.queue, self.ranges, budget,
                                   rng=self._rng_for("selective", ""), width=self.config.width,
                                   loop_plan=self.loop_plan)
        self._log("selective", None, res.iterations, f"covered {len(res.covered)}", "selective")
        for case in res.testcases:
            self._trace(case, Provenance.SELECTIVE)
        for values, _site in res.errors:
            self._file_bug(values, "selective")

    def _checkpoint(self) -> None:
        t = self.tracer
        self.store.write_json("goals_covered.json", sorted(t.covered))
        self.store.write_json("goals_unreachable.json", sorted(self.unreachable))
        self.store.write_json("goal_queue.json", list(t.queue))
        self.store.write_text("consumed_input_size",
                              f"{t.consumed.bytes} bytes\n{t.consumed.values} values\n")
        for i, s in enumerate(t.seeds):
            self.store.write_json(os.path.join("seeds", f"seed-{i:05d}.json"), s.to_json())

    def run(self) -> PipelineResult:
        self.analyse()
        self.generate_seeds()
        self.main_loop()
        self.selective()
        self._checkpoint()
        t = self.tracer
        return PipelineResult(list(t.testcases), list(self.bugs), list(t.queue), set(t.covered),
                              self.tree, self.program, t, list(self.audit), self.config,
                              set(self.unreachable))


def run_pipeline(source: str, config: Optional[PipelineConfig] = None,
                 store_dir: Optional[str] = None) -> PipelineResult:
    """Parse, instrument and test ``source``; see :class:`Pipeline` for the phases."""
    return Pipeline(source, config, store_dir).run()


def generate_seeds(source: str, config: Optional[PipelineConfig] = None) -> Pipeline:
    """Run analysis plus seed generation only; the returned pipeline holds the state."""
    p = Pipeline(source, config)
    p.analyse()
    p.generate_seeds()
    return p


def program_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def config_to_dict(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    d["strategy"] = cfg.strategy.value
    d["budget"]["mode"] = cfg.budget.mode.value
    return d
