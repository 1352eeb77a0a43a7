"""Command-line driver: certification, simulation, exhaustive bounds, offline costs.

Modes
  verify      check a potential table against every action, exact slacks
  synthesize  search for a table (and, without --ratio, the least ratio) by exact LP
  simulate    Monte Carlo behavioural runs against the exact expectation
  exact       exact distributional run on one sequence
  enumerate   exhaustive bound max E(cost) - C*opt over all sequences up to a length
  opt         offline optimum of a sequence, cross-checked against farthest-in-future

Reports are JSON (default) or CSV, with exact rationals as "p/q" strings
next to decimal approximations, and are byte-identical across runs with
the same configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import string
import sys
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from operator import add
from typing import Sequence

import numpy as np

from .cache import Config, Page, distance, service_cost
from .knowledge import synthesize_potential, verify_potential
from .offline import opt_cost, opt_cost_classical
from .rules import RuleTable, reference_potentials, rules_for
from .simulate import DistributionalRun, monte_carlo, read_sequence


def page_names(n: int) -> list[Page]:
    if n < 1:
        raise ValueError("need at least one page")
    letters = list(string.ascii_lowercase)
    return letters[:n] if n <= 26 else letters + [f"p{i}" for i in range(26, n)]


def generate_sequence(
    kind: str, pages: int, length: int, seed: int, rules: RuleTable | None = None
) -> list[Page]:
    """Deterministic request generators: i.i.d. uniform, k+1 round-robin, or nemesis.

    The nemesis walks the exact distributional run and always requests
    the page currently least likely to be cached (ties to the canonical
    first page).
    """
    universe = page_names(pages)
    if kind == "uniform":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return [universe[int(i)] for i in rng.integers(0, pages, size=length)]
    if kind == "cyclic":
        if rules is None:
            raise ValueError("cyclic generation needs a rule table for its cache size")
        cycle = universe[: rules.k + 1]
        return [cycle[t % len(cycle)] for t in range(length)]
    if kind == "nemesis":
        if rules is None:
            raise ValueError("nemesis generation needs a rule table")
        run = DistributionalRun.start(rules, universe)
        seq: list[Page] = []
        for _ in range(length):
            r = min(universe, key=lambda p: (run.page_probability(p), p))
            seq.append(r)
            run = run.step(r)
        return seq
    raise ValueError(f"unknown sequence kind {kind!r}")


def enumerate_excess(
    rules: RuleTable, pages: int, length: int, ratio: Fraction | None = None
) -> dict:
    """Depth-first exact walk of every sequence up to `length`.

    Tracks the distributional mix and the offline work-function table
    along the prefix tree and reports the worst E(cost) - ratio * opt
    seen at any node; the certified potential implies the maximum is
    at most zero from a class-A start.
    """
    ratio = rules.ratio if ratio is None else Fraction(ratio)
    universe = page_names(pages)
    k = rules.k
    initial = Config(universe[:k])
    cfgs = [Config(c) for c in combinations(universe, k)]
    n = len(cfgs)
    # cost columns per request: cols[r][y][z] = cost of serving r moving z -> y
    cols = {
        r: [tuple(service_cost(z, r, y) for z in cfgs) for y in cfgs]
        for r in universe
    }
    w0 = tuple(distance(initial, x) for x in cfgs)
    s0 = rules.initial_state(universe)

    worst = (Fraction(0) - ratio * min(w0), ())
    nodes = 0

    def visit(mix, ecost, w, depth, prefix):
        nonlocal worst, nodes
        nodes += 1
        excess = ecost - ratio * min(w)
        if excess > worst[0]:
            worst = (excess, tuple(prefix))
        if depth == length:
            return
        for r in universe:
            new_mix: dict = {}
            cost = Fraction(0)
            for s, p in mix.items():
                out = rules.outcome(s, r)
                cost += p * out.cost
                for wt, sub in out.branches:
                    new_mix[sub] = new_mix.get(sub, Fraction(0)) + p * wt
            rcols = cols[r]
            new_w = tuple(min(map(add, w, rcols[y])) for y in range(n))
            prefix.append(r)
            visit(new_mix, ecost + cost, new_w, depth + 1, prefix)
            prefix.pop()

    visit({s0: Fraction(1)}, Fraction(0), w0, 0, [])
    return {
        "algorithm": rules.algo,
        "pages": pages,
        "max_length": length,
        "ratio": str(ratio),
        "ratio_float": float(ratio),
        "max_excess": str(worst[0]),
        "max_excess_float": float(worst[0]),
        "worst_sequence": list(worst[1]),
        "sequences_checked": nodes,
        "passed": worst[0] <= 0,
    }


@dataclass
class ExperimentConfig:
    """Parsed harness invocation."""

    mode: str
    algorithm: str = "k2"
    pages: int | None = None
    length: int | None = None
    trials: int = 1000
    seed: int = 0
    ratio: Fraction | None = None
    fmt: str = "json"
    sequence_path: str | None = None
    kind: str = "uniform"
    potential: str = "certified"

    def validate(self, k: int):
        if self.mode in ("simulate", "exact", "opt", "enumerate"):
            if self.sequence_path is None and self.pages is not None and self.pages < k + 1:
                raise ValueError(f"need at least {k + 1} pages for a nontrivial run")
        if self.mode == "simulate" and self.trials < 1:
            raise ValueError("simulate mode needs at least one trial")


_ENUM_DEFAULTS = {"k2": (3, 12), "k3": (5, 8)}
_SIM_DEFAULTS = {"k2": (3, 12), "k3": (4, 12)}


def _rat_fields(name: str, value: Fraction | int) -> dict:
    return {name: str(Fraction(value)), f"{name}_float": float(value)}


def _load_sequence(config: ExperimentConfig, rules: RuleTable) -> tuple[list[Page], list[Page]]:
    """Returns (requests, page universe); files override generators."""
    if config.sequence_path is not None:
        seq = read_sequence(config.sequence_path)
        universe = sorted(set(seq))
        extra = 0
        while len(universe) < rules.k:
            universe.append(f"_fill{extra}")  # pad so an initial cache exists
            extra += 1
        return seq, sorted(universe)
    pages, length = _SIM_DEFAULTS[rules.algo]
    pages = config.pages if config.pages is not None else pages
    length = config.length if config.length is not None else length
    seq = generate_sequence(config.kind, pages, length, config.seed, rules)
    return seq, page_names(pages)


def run(config: ExperimentConfig) -> tuple[dict, bool]:
    """Dispatch one harness invocation; returns (report, pass condition)."""
    rules = rules_for(config.algorithm)
    config.validate(rules.k)

    if config.mode == "verify":
        table = (
            rules.potential
            if config.potential == "certified"
            else reference_potentials(config.algorithm)
        )
        ratio = rules.ratio if config.ratio is None else config.ratio
        report = verify_potential(rules, table, ratio)
        payload = {"algorithm": config.algorithm, "potential_source": config.potential}
        payload.update(report.to_json_dict())
        return payload, report.passed

    if config.mode == "synthesize":
        result = synthesize_potential(rules, ratio=config.ratio)
        payload = {
            "algorithm": config.algorithm,
            "requested_ratio": None if config.ratio is None else str(config.ratio),
            "feasible": result is not None,
        }
        if result is not None:
            payload.update(_rat_fields("C", result.ratio))
            payload["potential"] = {k: str(v) for k, v in sorted(result.potential.items())}
        return payload, result is not None

    if config.mode == "enumerate":
        pages, length = _ENUM_DEFAULTS[config.algorithm]
        pages = config.pages if config.pages is not None else pages
        length = config.length if config.length is not None else length
        payload = enumerate_excess(rules, pages, length, config.ratio)
        return payload, payload["passed"]

    if config.mode == "opt":
        seq, universe = _load_sequence(config, rules)
        initial = Config(universe[: rules.k])
        best, _table = opt_cost(seq, initial)
        belady = opt_cost_classical(seq, initial)
        payload = {
            "algorithm": config.algorithm,
            "sequence": seq,
            "initial": list(initial.pages),
            "opt_cost": best,
            "farthest_in_future_cost": belady,
            "agree": best == belady,
        }
        return payload, best == belady

    if config.mode in ("exact", "simulate"):
        seq, universe = _load_sequence(config, rules)
        initial = Config(universe[: rules.k])
        ratio = rules.ratio if config.ratio is None else config.ratio
        final = DistributionalRun.start(rules, universe).run(seq)
        best, _table = opt_cost(seq, initial)
        slack = final.expected_cost - ratio * best
        payload = {
            "algorithm": config.algorithm,
            "kind": None if config.sequence_path else config.kind,
            "seed": config.seed,
            "sequence": seq,
            "initial": list(initial.pages),
        }
        payload.update(_rat_fields("expected_cost", final.expected_cost))
        payload.update(_rat_fields("adjust_total", final.expected_adjust))
        payload["opt_cost"] = best
        if best > 0:
            payload.update(_rat_fields("ratio", final.expected_cost / best))
        else:
            payload["ratio"] = None
        payload.update(_rat_fields("certified_ratio", ratio))
        payload.update(_rat_fields("additive_slack", slack))
        if config.mode == "simulate":
            mean, variance = monte_carlo(rules, seq, config.trials, config.seed, universe)
            payload["trials"] = config.trials
            payload.update(_rat_fields("mc_mean", mean))
            payload.update(_rat_fields("mc_variance", variance))
            stderr = float(variance) ** 0.5 / config.trials**0.5
            payload["mc_stderr_float"] = stderr
        payload["passed"] = slack <= 0
        return payload, slack <= 0

    raise ValueError(f"unknown mode {config.mode!r}")


def _to_csv(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "actions" in payload:
        header = ["label", "state_class", "request_class", "cost", "adjust", "delta_phi", "slack"]
        writer.writerow(header)
        for row in payload["actions"]:
            writer.writerow([row[h] for h in header])
    else:
        writer.writerow(["key", "value"])
        for key, value in payload.items():
            if isinstance(value, (list, dict)):
                value = json.dumps(value)
            writer.writerow([key, value])
    return buf.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kspaging",
        description="Knowledge-state paging algorithms: certification and simulation.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("verify", "synthesize", "simulate", "exact", "enumerate", "opt"):
        p = sub.add_parser(mode)
        p.add_argument("--algorithm", choices=("k2", "k3"), default="k2")
        p.add_argument("--ratio", type=Fraction, default=None,
                       help='competitive ratio as an exact rational, e.g. "3/2"')
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        if mode == "verify":
            p.add_argument("--potential", choices=("certified", "reference"),
                           default="certified")
        if mode in ("simulate", "exact", "enumerate", "opt"):
            p.add_argument("--pages", type=int, default=None)
            p.add_argument("--length", type=int, default=None)
        if mode in ("simulate", "exact", "opt"):
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--kind", choices=("uniform", "cyclic", "nemesis"),
                           default="uniform")
            p.add_argument("--sequence", dest="sequence_path", default=None,
                           help="request file: one page token per line, '#' comments")
        if mode == "simulate":
            p.add_argument("--trials", type=int, default=1000)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = ExperimentConfig(
        mode=args.mode,
        algorithm=args.algorithm,
        pages=getattr(args, "pages", None),
        length=getattr(args, "length", None),
        trials=getattr(args, "trials", 1000),
        seed=getattr(args, "seed", 0),
        ratio=args.ratio,
        fmt=args.fmt,
        sequence_path=getattr(args, "sequence_path", None),
        kind=getattr(args, "kind", "uniform"),
        potential={"reference": "reference"}.get(
            getattr(args, "potential", "certified"), "certified"
        ),
    )
    try:
        payload, ok = run(config)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    if config.fmt == "csv":
        sys.stdout.write(_to_csv(payload))
    else:
        print(json.dumps(payload, indent=2))
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
