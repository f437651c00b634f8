"""Command line interface.

Exit codes: 0 success, 1 validation error (bad arguments, config or input
files), 2 runtime/data error. Options may also come from a JSON ``--config``
file (keys are option names with dashes replaced by underscores); flags win
over the file. Every run writes ``run-manifest.json`` into ``--out-dir``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


from . import __version__, _backend
from .adjust import AdjustSpec, apply_model, apply_mintadjust, train_human_ensemble, train_mintadjust
from .errors import DataError, InvalidArgument, MintEvalError, ValidationError
from .filtering import jaccard, topk_filter
from .forest import ForestConfig, ForestModel
from .lexmetrics import BleuConfig, Tokenizer, sentence_bleu, sentence_chrf
from .mbr import MbrConfig, load_matrices, mbr_select
from .metaeval import (
    DEFAULT_RESAMPLES,
    borda,
    build_inspa_tuples,
    delta_quadrants,
    ins_pa,
    pairs_with,
    spa,
    spearman_per_source,
    table_pvalues,
)
from .rankers import autorank_instance, autorank_system
from .registry import (
    MetricSpec,
    ScoreTable,
    default_registry,
    format_score,
    load_pools,
    load_score_table,
    load_translation_table,
)
from .report import MetaEvalReport, render_report

EXIT_OK, EXIT_VALIDATION, EXIT_DATA = 0, 1, 2

# per-command defaults applied after flags and the config file
DEFAULTS = {
    "tokenizer": "whitespace",
    "utility": "chrf",
    "exclude_self": False,
    "k": None,
    "instance_level": False,
    "resamples": DEFAULT_RESAMPLES,
    "human": "human",
    "format": "markdown",
    "trees": 1000,
    "depth": 4,
    "seeds": 30,
    "first_seed": 0,
    "lower_better": False,
    "out_dir": ".",
    "jobs": None,
}


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _csv(text):
    return [t for t in (s.strip() for s in text.split(",")) if t] if isinstance(text, str) else list(text)


def resolve(args, config: dict) -> dict:
    opts = {}
    for key, value in vars(args).items():
        if key in ("func", "config"):
            continue
        if value is None:
            value = config.get(key, DEFAULTS.get(key))
        opts[key] = value
    for key, value in config.items():
        opts.setdefault(key, value)
    return opts


def need(opts, *keys):
    missing = [k for k in keys if opts.get(k) in (None, "", [])]
    if missing:
        raise InvalidArgument("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def need_seed(opts) -> int:
    if opts.get("seed") is None:
        raise InvalidArgument("this command is randomized: pass --seed or set \"seed\" in the config file")
    seed = int(opts["seed"])
    if seed < 0:
        raise InvalidArgument("seed must be non-negative")
    return seed


def registry_from(opts):
    reg = default_registry()
    for spec in opts.get("metrics_registry") or []:
        reg.register(MetricSpec.from_dict(spec))
    for text in opts.get("metric_spec") or []:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise InvalidArgument(f"--metric-spec expects NAME:higher|lower[:family], got {text!r}")
        d = {"name": parts[0], "polarity": parts[1]}
        if len(parts) == 3:
            d["family"] = parts[2]
        reg.register(MetricSpec.from_dict(d))
    return reg


def emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def jobs_from(opts):
    if opts.get("jobs") is not None:
        return int(opts["jobs"])
    env = os.environ.get("MINT_EVAL_JOBS")
    return int(env) if env else None


# ---- subcommands -----------------------------------------------------------

def cmd_score(opts):
    need(opts, "translations")
    table = load_translation_table(opts["translations"])
    cfg = BleuConfig(tokenizer=Tokenizer(opts["tokenizer"]))
    entries = {}
    missing_ref = []
    for row in table:
        if row.ref is None:
            missing_ref.append((row.lp, row.system, row.seg))
            continue
        entries[(row.lp, row.system, row.seg, "chrf")] = sentence_chrf(row.hyp, row.ref)
        entries[(row.lp, row.system, row.seg, "bleu")] = sentence_bleu(row.hyp, row.ref, cfg)
    if missing_ref:
        raise DataError(f"{len(missing_ref)} row(s) have no reference, e.g. {missing_ref[0]}")
    emit(ScoreTable(entries).to_tsv(), opts.get("out"))


def cmd_mbr(opts):
    need(opts, "pools")
    pools = load_pools(opts["pools"])
    utility = opts["utility"]
    if utility.startswith("matrix:"):
        cfg = MbrConfig(metric=None, matrices=load_matrices(utility[len("matrix:"):]),
                        include_self=not opts["exclude_self"])
    elif utility in ("chrf", "bleu"):
        cfg = MbrConfig(metric=utility, include_self=not opts["exclude_self"])
    else:
        raise InvalidArgument(f"--utility must be chrf, bleu or matrix:FILE, got {utility!r}")
    lines = ["lp\tseg\tchosen_index"]
    entries = {}
    for pool in sorted(pools, key=lambda p: (p.lp, p.seg)):
        idx, eu = mbr_select(pool, cfg)
        lines.append(f"{pool.lp}\t{pool.seg}\t{idx}")
        for i, u in enumerate(eu):
            entries[(pool.lp, f"cand{i}", pool.seg, "mbr_utility")] = float(u)
    emit("\n".join(lines) + "\n", opts.get("out"))
    if opts.get("utilities_out"):
        ScoreTable(entries).save(opts["utilities_out"])


def _scores_for(opts):
    need(opts, "scores")
    return load_score_table(opts["scores"], registry_from(opts))


def _pick_lp(table, opts):
    lp = opts.get("lp")
    if lp:
        return lp
    lps = table.lps()
    if len(lps) != 1:
        raise InvalidArgument(f"--lp is required (table has language pairs {lps})")
    return lps[0]


def cmd_filter(opts):
    need(opts, "metric", "k")
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    systems = table.systems(lp)
    system = opts.get("system")
    if system is None:
        if len(systems) != 1:
            raise InvalidArgument(f"--system is required (table has systems {systems})")
        system = systems[0]
    col = table.segments(lp, system, opts["metric"])
    if not col:
        raise DataError(f"no {opts['metric']} scores for {lp}/{system}")
    sel = topk_filter(sorted(col.items()), int(opts["k"]), table.spec(opts["metric"]).polarity, opts["metric"])
    emit("".join(f"{i}\n" for i in sel.indices), opts.get("out"))


def _read_ids(path):
    ids = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        line = line.strip()
        if line:
            try:
                ids.append(int(line))
            except ValueError:
                raise InvalidArgument(f"{path}:{lineno}: not an integer row id: {line!r}") from None
    return ids


def cmd_overlap(opts):
    need(opts, "a", "b")
    emit(f"{jaccard(_read_ids(opts['a']), _read_ids(opts['b'])):.6f}\n", opts.get("out"))


def _forest_cfg(opts, seed):
    return ForestConfig(n_trees=int(opts["trees"]), max_depth=int(opts["depth"]), seed=seed)


def cmd_adjust_train(opts):
    need(opts, "target", "features", "out")
    seed = need_seed(opts)
    table = _scores_for(opts)
    features = _csv(opts["features"])
    fcfg = _forest_cfg(opts, seed)
    target = opts["target"]
    if table.registry.get(target).family.value == "human":
        lps = _csv(opts["lp"]) if opts.get("lp") else table.lps()
        systems = _csv(opts["systems"]) if opts.get("systems") else None
        split = [(lp, s) for lp in lps for s in (systems or table.systems(lp))
                 if table.segments(lp, s, target)]
        model = train_human_ensemble(table, features, split, fcfg, human_metric=target, jobs=jobs_from(opts))
    else:
        need(opts, "systems")
        lp = _pick_lp(table, opts)
        spec = AdjustSpec(target, tuple(features), tuple(_csv(opts["systems"])), lp, fcfg)
        model = train_mintadjust(table, spec, jobs=jobs_from(opts))
    model.save(opts["out"])


def cmd_adjust_apply(opts):
    need(opts, "model")
    model = ForestModel.load(opts["model"])
    table = _scores_for(opts)
    systems = _csv(opts["systems"]) if opts.get("systems") else None
    if model.meta.get("kind") == "human_ensemble":
        lps = [opts["lp"]] if opts.get("lp") else table.lps()
        out = ScoreTable({}, table.registry)
        for lp in lps:
            out = out.merged(apply_model(model, table, systems or table.systems(lp), lp, "metametrics"))
    else:
        out = apply_mintadjust(model, table, systems, opts.get("lp") or model.meta.get("lp"))
    emit(out.to_tsv(), opts.get("out"))


def cmd_autorank(opts):
    need(opts, "metrics")
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    systems = _csv(opts["systems"]) if opts.get("systems") else table.systems(lp)
    metrics = _csv(opts["metrics"])
    if opts["instance_level"]:
        rt = autorank_instance(table, lp, systems, metrics)
        lines = ["lp\tsystem\tseg\tautorank_ins"]
        lines += [f"{lp}\t{s}\t{seg}\t{format_score(v)}" for (s, seg), v in zip(rt.instance_keys, rt.instance_values)]
        lines.append("")
        lines.append("lp\tsystem\tautorank_ins_mean")
    else:
        rt = autorank_system(table, lp, systems, metrics)
        lines = ["lp\tsystem\tautorank"]
    lines += [f"{lp}\t{s}\t{format_score(v)}" for s, v in zip(rt.systems, rt.system_values)]
    emit("\n".join(lines) + "\n", opts.get("out"))


def _system_pairs(systems, focus):
    if focus:
        if focus not in systems:
            raise InvalidArgument(f"--focus system {focus!r} not among {systems}")
        return pairs_with(systems, focus)
    return [(i, j) for i in range(len(systems)) for j in range(i + 1, len(systems))]


def cmd_metaeval_spa(opts):
    need(opts, "metrics")
    seed = need_seed(opts)
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    systems = _csv(opts["systems"]) if opts.get("systems") else table.systems(lp)
    pairs = _system_pairs(systems, opts.get("focus"))
    B = int(opts["resamples"])
    human_p = table_pvalues(table, lp, systems, opts["human"], B, seed, pairs)
    lines = ["lp\tmetric\tspa"]
    for m in _csv(opts["metrics"]):
        metric_p = table_pvalues(table, lp, systems, m, B, seed, pairs)
        lines.append(f"{lp}\t{m}\t{spa(human_p, metric_p, len(systems), pairs):.6f}")
    emit("\n".join(lines) + "\n", opts.get("out"))


def cmd_metaeval_inspa(opts):
    need(opts, "metrics")
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    systems = _csv(opts["systems"]) if opts.get("systems") else table.systems(lp)
    pairs = [(systems[i], systems[j]) for i, j in _system_pairs(systems, opts.get("focus"))]
    lines = ["lp\tmetric\tins_pa\tn_tuples"]
    for m in _csv(opts["metrics"]):
        tuples = build_inspa_tuples(table, lp, pairs, m, opts["human"])
        lines.append(f"{lp}\t{m}\t{ins_pa(tuples):.6f}\t{len(tuples)}")
    emit("\n".join(lines) + "\n", opts.get("out"))


def cmd_metaeval_borda(opts):
    need(opts, "input")
    values: dict = {}
    text = Path(opts["input"]).read_text(encoding="utf-8").split("\n")
    if not text or text[0].strip().split("\t") != ["method", "lp", "value"]:
        raise InvalidArgument("borda input needs the header method\\tlp\\tvalue")
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise InvalidArgument(f"line {lineno}: expected 3 columns")
        try:
            values.setdefault(cols[0], {})[cols[1]] = float(cols[2])
        except ValueError:
            raise InvalidArgument(f"line {lineno}: unparsable value {cols[2]!r}") from None
    result = borda(values, higher_better=not opts["lower_better"])
    lines = ["method\tborda"] + [f"{m}\t{v:.6f}" for m, v in result.items()]
    emit("\n".join(lines) + "\n", opts.get("out"))


def cmd_metaeval_corr(opts):
    need(opts, "metrics")
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    metrics = _csv(opts["metrics"])
    lines = ["metric\t" + "\t".join(metrics)]
    for a in metrics:
        lines.append(a + "\t" + "\t".join(f"{spearman_per_source(table, lp, a, b):.6f}" for b in metrics))
    emit("\n".join(lines) + "\n", opts.get("out"))


def cmd_metaeval_delta(opts):
    need(opts, "biased", "reference", "x", "y")
    table = _scores_for(opts)
    lp = _pick_lp(table, opts)
    biased, reference = _csv(opts["biased"]), _csv(opts["reference"])
    if len(biased) != 2 or len(reference) != 2:
        raise InvalidArgument("--biased and --reference each take two systems: A,B")
    res = delta_quadrants(table, lp, tuple(biased), tuple(reference), opts["x"], opts["y"])
    keys = ["++", "+-", "-+", "--", "axis", "zero"]
    lines = ["pair\tlabel\tn\t" + "\t".join(keys) + "\tagreement\tslope\tintercept"]
    for name, r in res.items():
        lines.append(f"{name}\t{r.label}\t{r.dx.size}\t" + "\t".join(f"{r.quadrants[k]:.6f}" for k in keys)
                     + f"\t{r.agreement:.6f}\t{r.slope:.6f}\t{r.intercept:.6f}")
    emit("\n".join(lines) + "\n", opts.get("out"))
    if opts.get("csv"):
        rows = ["seg,dx,dy,pair_label"]
        for r in res.values():
            rows += [f"{s},{x:.6f},{y:.6f},{lab}" for s, x, y, lab in r.rows()]
        Path(opts["csv"]).write_text("\n".join(rows) + "\n", encoding="utf-8")


def _scenario_cfg(opts):
    from .synth import ScenarioConfig

    scenario = dict(opts.get("scenario") or {})
    if opts.get("scenario_file"):
        scenario.update(json.loads(Path(opts["scenario_file"]).read_text(encoding="utf-8")))
    return ScenarioConfig.from_dict(scenario)


def cmd_synth(opts):
    from dataclasses import replace

    from .synth import generate_scenario, write_world

    need(opts, "out")
    seed = need_seed(opts)
    world = generate_scenario(replace(_scenario_cfg(opts), seed=seed))
    write_world(world, opts["out"])


def cmd_synth_eval(opts):
    from .synth import run_monte_carlo

    first = int(opts["first_seed"]) if opts.get("seed") is None else need_seed(opts)
    seeds = range(first, first + int(opts["seeds"]))
    forest = ForestConfig(n_trees=int(opts["trees"]), max_depth=int(opts["depth"]))
    mc = run_monte_carlo(_scenario_cfg(opts), seeds, forest, int(opts["resamples"]), jobs=jobs_from(opts))
    checks = mc.checks()
    from .report import Column

    report = MetaEvalReport.from_results(
        mc.method_means(), [Column("spa"), Column("ins_pa")],
        title=f"synthetic scenario, mean over seeds {seeds.start}..{seeds.stop - 1}, pairs containing 'mint'")
    report.notes = [f"{k}: {v:.4f}" if isinstance(v, float) else f"{k}: {v}" for k, v in checks.items()]
    emit(render_report(report, opts["format"]), opts.get("out"))
    if opts.get("json_out"):
        Path(opts["json_out"]).write_text(json.dumps(
            {"seeds": list(seeds), "checks": checks, "per_seed": [r.summary() for r in mc.reports]}, indent=2) + "\n",
            encoding="utf-8")


def cmd_report(opts):
    need(opts, "input")
    emit(render_report(MetaEvalReport.load(opts["input"]), opts["format"]), opts.get("out"))


# ---- parser ----------------------------------------------------------------

def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override)")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker threads (fallback: $MINT_EVAL_JOBS)")
    common.add_argument("--out-dir", help="where run-manifest.json is written (default: .)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--metric-spec", action="append", help="register NAME:higher|lower[:family]")

    scored = ArgumentParser(add_help=False)
    scored.add_argument("--scores", help="ScoreTable TSV/JSONL")
    scored.add_argument("--lp")
    scored.add_argument("--systems", help="comma-separated system names")

    p = ArgumentParser(prog="mint-eval", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_backend.name} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("score", parents=[common], help="sentence chrF and BLEU for a translation table")
    s.add_argument("--translations")
    s.add_argument("--tokenizer", choices=["whitespace", "char"])
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("mbr", parents=[common], help="MBR selection over candidate pools")
    s.add_argument("--pools")
    s.add_argument("--utility", help="chrf | bleu | matrix:FILE")
    s.add_argument("--exclude-self", action="store_const", const=True)
    s.add_argument("--utilities-out", help="write expected utilities as a ScoreTable")
    s.set_defaults(func=cmd_mbr)

    s = sub.add_parser("filter", parents=[common, scored], help="top-k rows by a metric")
    s.add_argument("--metric")
    s.add_argument("--system")
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("overlap", parents=[common], help="Jaccard overlap of two selections")
    s.add_argument("--a")
    s.add_argument("--b")
    s.set_defaults(func=cmd_overlap)

    adj = sub.add_parser("adjust", help="MINTAdjust / learned ensemble").add_subparsers(dest="action", required=True)
    s = adj.add_parser("train", parents=[common, scored])
    s.add_argument("--target")
    s.add_argument("--features")
    s.add_argument("--trees", type=int)
    s.add_argument("--depth", type=int)
    s.set_defaults(func=cmd_adjust_train)
    s = adj.add_parser("apply", parents=[common, scored])
    s.add_argument("--model")
    s.set_defaults(func=cmd_adjust_apply)

    s = sub.add_parser("autorank", parents=[common, scored], help="AutoRank / AutoRank-Ins")
    s.add_argument("--metrics")
    s.add_argument("--instance-level", action="store_const", const=True)
    s.set_defaults(func=cmd_autorank)

    me = sub.add_parser("metaeval", help="meta-evaluation statistics").add_subparsers(dest="action", required=True)
    s = me.add_parser("spa", parents=[common, scored])
    s.add_argument("--metrics")
    s.add_argument("--human")
    s.add_argument("--focus", help="only pairs containing this system")
    s.add_argument("--resamples", type=int)
    s.set_defaults(func=cmd_metaeval_spa)
    s = me.add_parser("inspa", parents=[common, scored])
    s.add_argument("--metrics")
    s.add_argument("--human")
    s.add_argument("--focus")
    s.set_defaults(func=cmd_metaeval_inspa)
    s = me.add_parser("borda", parents=[common])
    s.add_argument("--input", help="TSV method\\tlp\\tvalue")
    s.add_argument("--lower-better", action="store_const", const=True)
    s.set_defaults(func=cmd_metaeval_borda)
    s = me.add_parser("corr", parents=[common, scored])
    s.add_argument("--metrics")
    s.set_defaults(func=cmd_metaeval_corr)
    s = me.add_parser("delta", parents=[common, scored])
    s.add_argument("--biased", help="A,B")
    s.add_argument("--reference", help="C,D")
    s.add_argument("--x")
    s.add_argument("--y")
    s.add_argument("--csv", help="plot-ready CSV of per-segment deltas")
    s.set_defaults(func=cmd_metaeval_delta)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic scenario, or `synth eval`")
    s.add_argument("action", nargs="?", choices=["eval"])
    s.add_argument("--scenario-file", help="JSON scenario options")
    s.add_argument("--seeds", type=int, help="number of seeds for `synth eval`")
    s.add_argument("--first-seed", type=int)
    s.add_argument("--trees", type=int)
    s.add_argument("--depth", type=int)
    s.add_argument("--resamples", type=int)
    s.add_argument("--format", choices=["markdown", "tsv"])
    s.add_argument("--json-out")
    s.set_defaults(func=None)

    s = sub.add_parser("report", parents=[common], help="render a MetaEvalReport JSON document")
    s.add_argument("--input")
    s.add_argument("--format", choices=["markdown", "tsv"])
    s.set_defaults(func=cmd_report)
    return p


def load_config(path) -> dict:
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidArgument(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise InvalidArgument(f"config file {path}: invalid JSON ({e})") from None
    if not isinstance(cfg, dict):
        raise InvalidArgument("config file must hold a JSON object")
    if cfg.get("tool") == "mint-eval" and isinstance(cfg.get("options"), dict):
        # a run-manifest.json replays the run it describes
        cfg = dict(cfg["options"], seed=cfg.get("seed"))
    if "metrics" in cfg and isinstance(cfg["metrics"], list) and cfg["metrics"] and isinstance(cfg["metrics"][0], dict):
        cfg["metrics_registry"] = cfg.pop("metrics")
    return cfg


def write_manifest(command: str, opts: dict) -> None:
    out_dir = Path(opts.get("out_dir") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "mint-eval",
        "version": __version__,
        "kernels": _backend.name,
        "command": command,
        "seed": opts.get("seed"),
        "options": {k: v for k, v in sorted(opts.items()) if k not in ("command", "action")},
    }
    (out_dir / "run-manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
    try:
        config = load_config(getattr(args, "config", None))
        opts = resolve(args, config)
        func = args.func
        if args.command == "synth":
            func = cmd_synth_eval if opts.get("action") == "eval" else cmd_synth
        func(opts)
        write_manifest(command, opts)
    except ValidationError as e:
        print(f"mint-eval {command}: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, MintEvalError) as e:
        print(f"mint-eval {command}: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        sys.stderr.close()  # downstream reader closed early (e.g. `| head`)
        return EXIT_OK
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        print(f"mint-eval {command}: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ValueError, KeyError) as e:
        print(f"mint-eval {command}: error: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
