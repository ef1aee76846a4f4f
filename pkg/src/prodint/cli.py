"""Command-line front end: simulate, estimate, verify, convergence.

Exit codes: 0 all good, 1 a check failed, 2 usage or configuration error,
3 I/O error.  Every run is reproducible from the config digest and the
seed printed in its report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from . import checks
from .estimators import (
    FormatError,
    estimate,
    read_event_histories,
    write_event_histories,
    write_grid_json,
    write_occupation_csv,
)
from .simulation import (
    CensoringConfig,
    ConfigError,
    ScenarioConfig,
    exact_pathspace,
    load_censoring,
    load_scenario,
    simulate_sample,
)

CORPUS_ENV = "PRODINT_CORPUS"
CORPUS_SCENARIOS = ("idn.json", "surv.json", "forced_exit.json")


@dataclass
class RunReport:
    command: str
    config_digest: str
    seed: int | None
    records: list = field(default_factory=list)
    table: list = field(default_factory=list)
    elapsed_s: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "records": [asdict(r) for r in self.records],
            "table": self.table,
            "elapsed_s": self.elapsed_s,
        }


def _digest(*documents) -> str:
    canonical = json.dumps(documents, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _write_report(report: RunReport, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(report.to_json_dict(), handle, indent=2)
            handle.write("\n")


def _summarize(records) -> int:
    """Print one line per check name; return 1 if anything failed."""
    by_name: dict[str, list] = {}
    for record in records:
        by_name.setdefault(record.name, []).append(record)
    failed = False
    for name, group in by_name.items():
        bad = [r for r in group if not r.passed]
        worst = max(abs(r.lhs - r.rhs) for r in group)
        status = "PASS" if not bad else "FAIL"
        print(f"check {name}: {status} ({len(group) - len(bad)}/{len(group)}, worst gap {worst:.3e})")
        for r in bad[:5]:
            print(f"  FAIL {r.detail}: lhs={r.lhs!r} rhs={r.rhs!r} tol={r.tol!r}")
        failed = failed or bool(bad)
    return 1 if failed else 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    censoring = load_censoring(args.censoring) if args.censoring else CensoringConfig("none")
    sample = simulate_sample(scenario, censoring, args.n, args.seed)
    rows = write_event_histories(args.out, sample)
    observed_jumps = sum(len(eh.jumps) for eh in sample)
    print(f"wrote {len(sample)} subjects ({rows} rows, {observed_jumps} jumps) to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    sample = read_event_histories(args.input, max_state=args.dim)
    grid = estimate(sample, upto=args.upto, dim=args.dim)
    if args.out_csv:
        write_occupation_csv(args.out_csv, grid)
        print(f"wrote occupation curve to {args.out_csv}")
    if args.out_json:
        write_grid_json(args.out_json, grid)
        print(f"wrote estimate grid to {args.out_json}")
    tail = grid.occupation_at(grid.times[-1]) if grid.times else grid.p0
    print("final occupation estimate:", " ".join(f"{v:.4f}" for v in tail))
    return 0


def _corpus_scenarios(corpus_dir) -> dict[str, ScenarioConfig]:
    scenarios = {}
    if corpus_dir:
        for name in CORPUS_SCENARIOS:
            path = os.path.join(corpus_dir, name)
            if not os.path.exists(path):
                raise FileNotFoundError(f"corpus file missing: {path}")
            scenarios[name] = load_scenario(path)
    else:
        package_corpus = resources.files("prodint") / "corpus"
        for name in CORPUS_SCENARIOS:
            with resources.as_file(package_corpus / name) as path:
                scenarios[name] = load_scenario(path)
    return scenarios


def cmd_verify(args) -> int:
    started = time.perf_counter()
    corpus_dir = args.corpus or os.environ.get(CORPUS_ENV)
    if args.scenario:
        scenarios = {os.path.basename(args.scenario): load_scenario(args.scenario)}
    else:
        scenarios = _corpus_scenarios(corpus_dir)
    spaces = {name: exact_pathspace(cfg) for name, cfg in scenarios.items()}
    rng = np.random.default_rng(args.seed)

    golden = list(spaces.values())
    golden_labels = list(spaces.keys())
    mixed = [checks.random_scenario(rng) for _ in range(args.count)]
    mixed += [checks.random_scenario(rng, progressive=True) for _ in range(args.count // 4)]
    mixed += [checks.random_scenario(rng, forced_exit=True) for _ in range(args.count // 4)]
    mixed_spaces = [exact_pathspace(s) for s in mixed]
    everything = golden + mixed_spaces
    labels = golden_labels + [f"random {i}" for i in range(len(mixed_spaces))]

    suites = {
        "occupation-identity": lambda: [
            r for ps, lab in zip(everything, labels) for r in checks.occupation_identity_checks(ps, lab)
        ],
        "hazard-defect": lambda: [
            r for ps, lab in zip(everything, labels) for r in checks.hazard_defect_checks(ps, label=lab)
        ],
        "chapman-kolmogorov": lambda: checks.chapman_kolmogorov_checks(),
        "count-mean-defect": lambda: [
            r for ps, lab in zip(everything, labels) for r in checks.count_mean_defect_checks(ps, label=lab)
        ],
        "transform-duality": lambda: checks.transform_duality_checks(rng, count=args.count),
        "hazard-integral": lambda: [
            r for ps, lab in zip(everything, labels) for r in checks.hazard_integral_checks(ps, label=lab)
        ],
        "markov-product": lambda: checks.markov_product_checks(rng, count=max(50, args.count // 2)),
        "occupation-lower-bound": lambda: checks.occupation_bound_checks(everything, labels),
        "extinction-exit": lambda: checks.extinction_checks(everything, labels),
        "uncensored-identity": lambda: checks.uncensored_identity_checks(rng, count=args.count),
    }
    if args.only and args.only not in suites:
        print(f"unknown check {args.only!r}; choose from {', '.join(sorted(suites))}", file=sys.stderr)
        return 2

    records = []
    for name, run in suites.items():
        if args.only and name != args.only:
            continue
        records.extend(run())

    if args.only == "hazard-defect":
        target = next(iter(spaces.values()))
        print("defect profile on", next(iter(spaces)))
        for label, value in checks.hazard_defect_table(target):
            print(f"  {label:>8}: {value:.3e}")

    status = _summarize(records)
    report = RunReport(
        command="verify",
        config_digest=_digest({k: v.to_json_dict() for k, v in scenarios.items()}, args.count),
        seed=args.seed,
        records=records,
        elapsed_s=time.perf_counter() - started,
    )
    _write_report(report, args.report)
    return status


def cmd_convergence(args) -> int:
    started = time.perf_counter()
    scenario = load_scenario(args.scenario)
    conforming = load_censoring(args.censoring)
    violating = load_censoring(args.violating) if args.violating else None
    ns = [int(x) for x in args.n.split(",") if x]
    if not ns or any(n < 1 for n in ns):
        raise ConfigError("need a comma-separated list of positive sample sizes")
    records, table = checks.convergence_study(
        scenario, conforming, violating, ns, args.seed, args.sup_tol, args.bias_floor
    )
    print(f"{'arm':>12} {'n':>8} {'sup_error':>12}")
    for row in table:
        print(f"{row['arm']:>12} {row['n']:>8} {row['sup_error']:>12.5f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write("arm,n,sup_error\n")
            for row in table:
                handle.write(f"{row['arm']},{row['n']},{row['sup_error']}\n")
        print(f"wrote table to {args.out}")
    status = _summarize(records)
    report = RunReport(
        command="convergence",
        config_digest=_digest(
            scenario.to_json_dict(),
            conforming.to_json_dict(),
            violating.to_json_dict() if violating else None,
            ns,
        ),
        seed=args.seed,
        records=records,
        table=table,
        elapsed_s=time.perf_counter() - started,
    )
    _write_report(report, args.report)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodint",
        description="Multi-state product-integral estimation and its verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample censored event histories to CSV")
    sim.add_argument("--scenario", required=True, help="scenario JSON file")
    sim.add_argument("--censoring", help="censoring JSON file (default: none)")
    sim.add_argument("--n", type=int, required=True, help="number of subjects (>= 1)")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run the estimators on an event-history CSV")
    est.add_argument("--input", required=True, help="event-history CSV")
    est.add_argument("--dim", type=int, help="number of observable states (default: inferred)")
    est.add_argument("--upto", type=float, help="ignore transitions after this time")
    est.add_argument("--out-csv", help="occupation-curve CSV output")
    est.add_argument("--out-json", help="full estimate grid JSON output")
    est.set_defaults(func=cmd_estimate)

    ver = sub.add_parser("verify", help="run the exact-identity check suites")
    ver.add_argument("--corpus", help=f"corpus directory (default: packaged, or ${CORPUS_ENV})")
    ver.add_argument("--scenario", help="verify a single scenario JSON instead of the corpus")
    ver.add_argument("--only", help="run a single named check suite")
    ver.add_argument("--count", type=int, default=100, help="randomized instances per suite")
    ver.add_argument("--seed", type=int, default=7)
    ver.add_argument("--report", help="write a JSON run report here")
    ver.set_defaults(func=cmd_verify)

    conv = sub.add_parser("convergence", help="error-vs-sample-size study against the oracle")
    conv.add_argument("--scenario", required=True)
    conv.add_argument("--censoring", required=True, help="conforming censoring JSON")
    conv.add_argument("--violating", help="violating censoring JSON for the negative control")
    conv.add_argument("--n", default="100,1000,10000", help="comma-separated sample sizes")
    conv.add_argument("--seed", type=int, default=7)
    conv.add_argument("--sup-tol", type=float, default=0.02, help="gate on the final sup error")
    conv.add_argument("--bias-floor", type=float, default=0.05, help="violating arm must exceed this")
    conv.add_argument("--out", help="plot-ready CSV output")
    conv.add_argument("--report", help="write a JSON run report here")
    conv.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
