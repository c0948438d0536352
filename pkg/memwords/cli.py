"""Batch front end: simulate, estimate, adversary, oracle, bound."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from jsonschema import ValidationError

from . import bounds, processes, reports
from .config import SETTINGS, RunConfig, Settings, build_run_config, load_config_file
from .estimator import EstimatorParams, checkpoint_reports, default_checkpoints
from .markov_oracle import ExplicitChain, load_chain, memory_word_report
from .seqcore import Sequence, read_sequence, write_sequence

logger = logging.getLogger(__name__)

DEFAULT_BOUND_GRID = (10, 100, 1000, 10**4, 10**5, 10**6)
ESTIMATE_COLUMNS = ["n", "chi", "deltas", "support_sizes"]
SUCCESS_COLUMNS = ["stage", "horizon", "success", "target", "margin", "selected"]
BOUND_COLUMNS = ["n", "bound", "clamped"]


class CommandFailed(Exception):
    """A command already reported its failure; carries the stderr marker."""

    def __init__(self, marker: str, detail: str = "") -> None:
        super().__init__(marker)
        self.marker = marker
        self.detail = detail


def _configure_logging(verbose: int, settings: Settings) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def _out_dir(config: RunConfig, settings: Settings) -> Path:
    return Path(config.output) if config.output else settings.out_dir


def _store(config: RunConfig, artifact_type: str, run_id: str, payload: dict) -> None:
    from .storage import ensure_index, get_client, store_artifact

    try:
        client = get_client()
        ensure_index(client)
        doc_id = store_artifact(client, config.run_id or run_id, artifact_type, payload)
    except Exception as e:
        logger.error("archive failed: %s", e)
        raise CommandFailed("STORE_FAILED", str(e)) from e
    print("STORED_OK", doc_id)


def _simulated_sequence(config: RunConfig) -> tuple[Sequence, Optional[ExplicitChain]]:
    """(sample path, the chain when the process is an explicit one)."""
    seed = config.seeds[0]
    length = config.length
    if length < 0:
        raise ValueError(f"length must be nonnegative, got {length}")
    if config.process == "chain":
        if not config.chain:
            raise ValueError("--process chain needs --chain PATH")
        chain = load_chain(config.chain)
        return processes.sample_explicit(chain, length, seed), chain
    if length == 0:
        return Sequence(), None
    if config.process == "ryabko":
        return Sequence(processes.sample_ryabko(length, seed)), None
    if config.process == "ryabko-parity":
        f = processes.parity_relabeling()
    elif config.process == "folded":
        f, _ = processes.staged_relabeling(config.horizons)
    elif config.process == "plan":
        if not config.plan:
            raise ValueError("--process plan needs --plan PATH")
        try:
            raw = json.loads(Path(config.plan).read_text(encoding="utf-8"))
            f = processes.plan_from_dict(raw).delivered.relabeling
        except (KeyError, TypeError, IndexError) as e:
            raise ValueError(f"{config.plan}: not a stage plan ({e})") from e
    else:
        raise ValueError(f"Unknown process {config.process!r}")
    return processes.relabel(processes.sample_ryabko(length, seed), f), None


def cmd_simulate(config: RunConfig, settings: Settings) -> None:
    seq, chain = _simulated_sequence(config)
    path = Path(config.output) if config.output else settings.out_dir / f"{config.process}_seed{config.seeds[0]}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_sequence(path, seq)
    print("SIMULATE_OK")
    print(path)
    if chain is not None:
        report = memory_word_report(chain)
        words = reports.memory_report_to_dict(chain, report)["minimal_words"]
        print(f"memory words: longest {report.longest_minimal_length}, shortest {report.shortest_memory_length}")
        print("minimal: " + " ".join(w or "(empty)" for w in words))


def cmd_estimate(config: RunConfig, settings: Settings) -> None:
    if not config.input:
        raise ValueError("estimate needs --input PATH")
    seq = read_sequence(config.input)
    if len(seq) == 0:
        raise ValueError(f"{config.input}: empty sequence")
    params = config.params()
    if not params.checkpoints:
        params = EstimatorParams(params.gamma, params.beta, default_checkpoints(seq.horizon))
    rows = checkpoint_reports(seq, params)
    csv_path = Path(config.output) if config.output else settings.out_dir / f"estimate_{Path(config.input).stem}.csv"
    manifest_path = csv_path.with_suffix(".manifest.json")
    manifest = {
        "command": "estimate",
        "input": str(config.input),
        "gamma": params.gamma,
        "beta": params.beta,
        "checkpoints": list(params.checkpoints),
        "final_chi": rows[-1]["chi"] if rows else 0,
        "outputs": [str(csv_path), str(manifest_path)],
    }
    reports.write_json(manifest_path, manifest, "run_manifest")
    reports.write_csv(csv_path, rows, ESTIMATE_COLUMNS)
    print("ESTIMATE_OK")
    print(csv_path)
    print(manifest_path)
    if config.store:
        _store(config, "run_manifest", f"estimate-{Path(config.input).stem}", {"manifest": manifest, "rows": rows})


def _success_rows(plan_data: dict) -> list[dict]:
    rows = []
    for s in plan_data["stages"]:
        for r in s["searched"]:
            rows.append({
                "stage": s["index"],
                "horizon": r["horizon"],
                "success": r["success"],
                "target": s["target"],
                "margin": s["margin"],
                "selected": r["horizon"] == s["horizon"],
            })
    return rows


def _write_plan(plan: processes.StagePlan, out_dir: Path) -> tuple[dict, list[Path]]:
    data = processes.plan_to_dict(plan)
    json_path = reports.write_json(out_dir / "stage_plan.json", data, "stage_plan")
    md_path = out_dir / "stage_plan.md"
    md_path.write_text(reports.render_plan_markdown(data), encoding="utf-8")
    csv_path = reports.write_csv(out_dir / "stage_success.csv", _success_rows(data), SUCCESS_COLUMNS)
    return data, [json_path, md_path, csv_path]


def cmd_adversary(config: RunConfig, settings: Settings) -> None:
    estimator = processes.plug_in(config.estimator, config.params())
    out_dir = _out_dir(config, settings)
    seed = config.seeds[0]
    try:
        plan = processes.build_adversary(
            estimator,
            stages=config.stages,
            replicates=config.replicates,
            margin=config.margin,
            seed=seed,
            horizon_cap=config.horizon_cap,
            max_rejections=config.max_rejections,
            name=config.estimator,
        )
    except processes.AdversarySearchError as e:
        _, paths = _write_plan(e.plan, out_dir)
        raise CommandFailed("ADVERSARY_SEARCH_FAILED", f"{e} (partial plan: {paths[0]})") from e
    data, paths = _write_plan(plan, out_dir)
    print("ADVERSARY_OK")
    for p in paths:
        print(p)
    for s in data["stages"][:-1]:
        print(f"stage {s['index']}: n={s['horizon']} success={s['success']:.3f} target={s['target']:.3f}")
    if config.store:
        _store(config, "stage_plan", f"adversary-{config.estimator}-seed{seed}", data)


def cmd_oracle(config: RunConfig, settings: Settings) -> None:
    if not config.chain:
        raise ValueError("oracle needs --chain PATH")
    chain = load_chain(config.chain)
    data = reports.memory_report_to_dict(chain, memory_word_report(chain), source=str(config.chain))
    out_dir = _out_dir(config, settings)
    json_path = reports.write_json(out_dir / "memory_report.json", data, "memory_report")
    md_path = out_dir / "memory_report.md"
    md_path.write_text(reports.render_memory_markdown(data), encoding="utf-8")
    print("ORACLE_OK")
    print(json_path)
    print(md_path)
    print(f"order {data['longest_minimal_length']}, shortest memory word {data['shortest_memory_length']}")
    if config.store:
        _store(config, "memory_report", f"oracle-{Path(config.chain).stem}", data)


def cmd_bound(config: RunConfig, settings: Settings) -> None:
    if config.hoeffding:
        if config.n is None or config.epsilon is None:
            raise ValueError("--hoeffding needs --n and --epsilon")
        value = bounds.hoeffding_bound(bounds.HoeffdingInput.shared(config.n, config.width, config.epsilon))
        print("BOUND_OK")
        print(f"hoeffding n={config.n} width={config.width:g} epsilon={config.epsilon:g}: {value:.12g}")
        return
    rows = bounds.bound_table(config.grid or DEFAULT_BOUND_GRID, config.gamma, config.beta)
    print("BOUND_OK")
    if config.output:
        print(reports.write_csv(config.output, rows, BOUND_COLUMNS))
    print("n,bound,clamped")
    for r in rows:
        print(f"{r['n']},{r['bound']:.6g},{r['clamped']:.6g}")


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "adversary": cmd_adversary,
    "oracle": cmd_oracle,
    "bound": cmd_bound,
}


def _common(p: argparse.ArgumentParser, estimator_flags: bool = True) -> None:
    p.add_argument("--config", default=None, help="JSON file supplying any flag (flags override it)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    p.add_argument("--output", default=None, help="Output file or directory (default: MEMWORDS_OUT_DIR)")
    if estimator_flags:
        p.add_argument("--gamma", type=float, default=None, help="Support exponent in (0, 1)")
        p.add_argument("--beta", type=float, default=None, help="Acceptance exponent in (0, (1-gamma)/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memwords", description="Markov order and memory-word estimation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Sample a process into a sequence file")
    _common(p, estimator_flags=False)
    p.add_argument("--process", choices=["chain", "ryabko", "ryabko-parity", "folded", "plan"], default=None)
    p.add_argument("--chain", default=None, help="Chain specification JSON (process chain)")
    p.add_argument("--horizons", type=int, nargs="+", default=None, help="Stage horizons n_0 < n_1 < ... (process folded)")
    p.add_argument("--plan", default=None, help="Stage plan JSON (process plan)")
    p.add_argument("--length", type=int, default=None, help="Number of symbols")
    p.add_argument("--seed", "--seeds", dest="seeds", type=int, nargs="+", default=None)

    p = sub.add_parser("estimate", help="chi_n and discrepancies over a checkpoint schedule")
    _common(p)
    p.add_argument("--input", default=None, help="Sequence file")
    p.add_argument("--checkpoints", type=int, nargs="+", default=None, help="Horizons n (default: ceil(1.5^t) schedule)")
    p.add_argument("--store", action="store_true", default=None, help="Archive the run in Elasticsearch")
    p.add_argument("--run-id", dest="run_id", default=None)

    p = sub.add_parser("adversary", help="Staged relabeling that fools an estimator")
    _common(p)
    p.add_argument("--estimator", default=None, help="shortest_word, order, constant-one, constant-two")
    p.add_argument("--stages", type=int, default=None, help="J")
    p.add_argument("--replicates", type=int, default=None, help="R accepted draws per candidate horizon")
    p.add_argument("--margin", type=float, default=None, help="delta (default: Hoeffding margin at alpha=0.05)")
    p.add_argument("--seed", "--seeds", dest="seeds", type=int, nargs="+", default=None)
    p.add_argument("--horizon-cap", dest="horizon_cap", type=int, default=None)
    p.add_argument("--max-rejections", dest="max_rejections", type=int, default=None)
    p.add_argument("--store", action="store_true", default=None)
    p.add_argument("--run-id", dest="run_id", default=None)

    p = sub.add_parser("oracle", help="Exact memory words of an explicit chain")
    _common(p, estimator_flags=False)
    p.add_argument("--chain", default=None, help="Chain specification JSON")
    p.add_argument("--store", action="store_true", default=None)
    p.add_argument("--run-id", dest="run_id", default=None)

    p = sub.add_parser("bound", help="Error bound on P(chi_n > K) or a Hoeffding bound")
    _common(p)
    p.add_argument("--grid", type=int, nargs="+", default=None, help="n values")
    p.add_argument("--hoeffding", action="store_true", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--width", type=float, default=None, help="Shared range width b - a")
    p.add_argument("--epsilon", type=float, default=None)
    return parser


def main(argv: Optional[list[str]] = None, settings: Settings = SETTINGS) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, settings)
    try:
        file_values = load_config_file(args.config) if args.config else {}
        config = build_run_config(args.command, settings, file_values, vars(args))
        COMMANDS[args.command](config, settings)
    except CommandFailed as e:
        print(e.marker, file=sys.stderr)
        if e.detail:
            print(e.detail, file=sys.stderr)
        return 1
    except ValidationError as e:
        print("SCHEMA_VALIDATION_FAILED", file=sys.stderr)
        print(e.message, file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
