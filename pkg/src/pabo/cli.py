"""Command-line harness: ``pabo run``, ``pabo compare``, ``pabo validate``.

A run is described by a manifest (a YAML file given with ``--config``) whose
keys mirror the flags; flags override the file.  Relative paths inside a
manifest resolve against the manifest's directory.

Objective specs::

    table:<csv path>          full-grid lookup table
    synthetic:<name>          sphere-pair | zdt1-grid | conflicting-quadratics
    composed:<template path>  crossbar energy + seeded surrogate error
    case:<name>               built-in case-study analogue (cs1/cs2/cs3)

``--space`` also accepts ``case:<name>``.  Failures print one JSON record on
stderr, exit nonzero and leave the output directory untouched.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .baselines import Nsga2Config, run_grid, run_nsga2, run_random
from .cases import SPACES, generate_case_bundle
from .core import PaboConfig, run_pabo
from .energy import load_template
from .objectives import SYNTHETIC, ComposedObjective, ObjectiveError, ObjectiveFn, check_table, load_table, make_synthetic
from .pareto import hypervolume_2d, reference_point
from .result import RunResult
from .space import SearchSpace, format_value, load_space, space_to_doc

log = logging.getLogger("pabo")

ALGORITHMS = ("pabo", "nsga2", "random", "grid")
EXIT_CONFIG = 2
EXIT_RUNTIME = 1


class ConfigError(ValueError):
    pass


@dataclass
class RunManifest:
    algorithm: str
    space: str
    objective: str
    seed: int = 0
    max_evals: int | None = None
    out: str | None = None
    surrogate_seed: int = 0
    reference_point: list[float] | None = None
    pabo: dict = field(default_factory=dict)
    nsga2: dict = field(default_factory=dict)
    label: str | None = None

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "label"}


# -- manifest assembly -------------------------------------------------------


def _load_yaml(path: Path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return doc


def manifest_from(config: str | None, overrides: dict[str, Any]) -> RunManifest:
    doc: dict[str, Any] = {}
    base = Path(".")
    if config:
        doc = _load_yaml(Path(config))
        base = Path(config).parent
        # file-relative paths; flags are relative to the working directory
        for key in ("space", "objective"):
            if key in doc and key not in overrides:
                doc[key] = _rebase(doc[key], base)
    for key, value in overrides.items():
        if key in ("pabo", "nsga2"):
            doc[key] = {**doc.get(key, {}), **value}
        else:
            doc[key] = value
    known = {f.name for f in fields(RunManifest)} - {"label"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown manifest key(s): {sorted(unknown)}")
    doc.setdefault("algorithm", "pabo")
    for key in ("space", "objective"):
        if key not in doc:
            raise ConfigError(f"manifest needs '{key}' (file or --{key})")
    if doc["algorithm"] not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {doc['algorithm']!r}; choose from {ALGORITHMS}")
    m = RunManifest(**doc)
    m.label = Path(config).stem if config else m.algorithm
    return m


def _rebase(spec: str, base: Path) -> str:
    kind, sep, rest = str(spec).partition(":")
    if sep and kind in ("table", "composed"):
        return f"{kind}:{_join(base, rest)}"
    if sep and kind in ("synthetic", "case"):
        return spec
    return _join(base, spec)


def _join(base: Path, path: str) -> str:
    p = Path(path)
    return str(p if p.is_absolute() else base / p)


def build_space(spec: str) -> SearchSpace:
    if spec.startswith("case:"):
        name = spec[5:]
        if name not in SPACES:
            raise ConfigError(f"unknown case {name!r}")
        return generate_case_bundle(name).space
    try:
        return load_space(spec)
    except FileNotFoundError:
        raise ConfigError(f"{spec}: space file not found") from None
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"{spec}: {exc}") from None


def build_objective(spec: str, space: SearchSpace, surrogate_seed: int = 0) -> ObjectiveFn:
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ConfigError(f"objective spec {spec!r} needs a kind prefix (table:, synthetic:, composed:, case:)")
    try:
        if kind == "table":
            return load_table(Path(rest), space)
        if kind == "synthetic":
            if rest not in SYNTHETIC:
                raise ConfigError(f"unknown synthetic objective {rest!r}; choose from {SYNTHETIC}")
            return make_synthetic(rest, space)
        if kind == "composed":
            return ComposedObjective(space, load_template(rest), surrogate_seed=surrogate_seed)
        if kind == "case":
            bundle = generate_case_bundle(rest, surrogate_seed)
            if space_to_doc(bundle.space) != space_to_doc(space):
                raise ConfigError(f"space does not match case {rest!r}")
            return bundle.objective
    except FileNotFoundError as exc:
        raise ConfigError(f"{exc.filename}: file not found") from None
    except (ObjectiveError, ValueError, KeyError, yaml.YAMLError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{rest}: {exc}") from None
    raise ConfigError(f"unknown objective kind {kind!r}")


def execute(m: RunManifest) -> tuple[RunResult, SearchSpace, dict]:
    space = build_space(str(m.space))
    objective = build_objective(str(m.objective), space, m.surrogate_seed)
    if m.algorithm == "pabo":
        opts = {**m.pabo, "seed": m.seed}
        if m.max_evals is not None:
            opts["max_evals"] = m.max_evals
        try:
            cfg = PaboConfig(**opts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"pabo options: {exc}") from None
        return run_pabo(space, objective, cfg), space, cfg.to_dict()
    if m.algorithm == "nsga2":
        opts = {**m.nsga2, "seed": m.seed}
        try:
            cfg = Nsga2Config(**opts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"nsga2 options: {exc}") from None
        return run_nsga2(space, objective, cfg), space, cfg.to_dict()
    if m.algorithm == "random":
        if m.max_evals is None:
            raise ConfigError("random search needs max_evals")
        return run_random(space, objective, m.max_evals, m.seed), space, {"budget": m.max_evals, "seed": m.seed}
    return run_grid(space, objective), space, {}


# -- output rendering --------------------------------------------------------


def _roles(res: RunResult, n_init: int) -> dict[int, dict]:
    """Per-evaluation PABO bookkeeping keyed by eval_index."""
    out: dict[int, dict] = {o.eval_index: {"role": "init", "iteration": 0} for o in res.history[:n_init]}
    by_hp = {o.hp: o.eval_index for o in res.history}
    for t in res.extra.get("trace", []):
        if t.theta is not None and t.theta == t.gamma:
            entries = [(t.theta, "theta+gamma", t.theta_to_eng or t.gamma_to_err)]
        else:
            entries = [(t.theta, "theta", t.theta_to_eng), (t.gamma, "gamma", t.gamma_to_err)]
        for hp, role, fed in entries:
            if hp is not None and by_hp[hp] not in out:
                out[by_hp[hp]] = {"role": role, "iteration": t.iteration, "cross_fed": fed}
    return out


def render_history(res: RunResult, space: SearchSpace, n_init: int | None = None) -> str:
    roles = _roles(res, n_init) if n_init else {}
    stamps = res.extra.get("timestamps", [])
    buf = io.StringIO()
    for o in res.history:
        rec = {
            "eval_index": o.eval_index,
            "hp": {k: v for k, v in space.values_of(o.hp).items()},
            "err": o.objectives.err,
            "eng": o.objectives.eng,
            "timestamp": stamps[o.eval_index] if o.eval_index < len(stamps) else None,
        }
        rec.update(roles.get(o.eval_index, {}))
        buf.write(json.dumps(rec) + "\n")
    return buf.getvalue()


def render_front(res: RunResult, space: SearchSpace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eval_index"] + space.names + ["err", "eng"])
    for o in sorted(res.front, key=lambda o: (o.objectives.err, o.objectives.eng, o.eval_index)):
        vals = [format_value(v) for v in space.values_of(o.hp).values()]
        w.writerow([o.eval_index] + vals + [repr(o.objectives.err), repr(o.objectives.eng)])
    return buf.getvalue()


def _reference(m: RunManifest, res: RunResult) -> tuple[list[float], str]:
    if m.reference_point is not None:
        if len(m.reference_point) != 2:
            raise ConfigError("reference_point must have two entries (err, eng)")
        return [float(x) for x in m.reference_point], "declared"
    return list(reference_point([o.objectives for o in res.history])), "history"


def _write_outputs(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


def cmd_run(args: argparse.Namespace) -> int:
    m = manifest_from(args.config, _overrides(args))
    if not m.out:
        raise ConfigError("no output directory (--out)")
    res, space, algo_cfg = execute(m)
    ref, ref_source = _reference(m, res)
    try:
        hv = hypervolume_2d(res.front_pairs(), ref)
    except ValueError as exc:
        raise ConfigError(f"reference point {ref}: {exc}") from None
    summary = {
        "algorithm": m.algorithm,
        "evals_used": res.evals_used,
        "stop_reason": res.stop_reason,
        "front_size": len(res.front),
        "hypervolume": hv,
        "reference_point": ref,
        "reference_source": ref_source,
        "wall_time": res.wall_time,
        "partial": bool(res.extra.get("partial", False)),
        "manifest": m.echo(),
        "algorithm_config": algo_cfg,
    }
    if "cache_hits" in res.extra:
        summary["cache_hits"] = res.extra["cache_hits"]
    n_init = algo_cfg.get("n_init") if m.algorithm == "pabo" else None
    _write_outputs(
        Path(m.out),
        {
            "history.jsonl": render_history(res, space, n_init),
            "front.csv": render_front(res, space),
            "summary.json": json.dumps(summary, indent=2, default=str) + "\n",
        },
    )
    print(json.dumps({"out": m.out, "evals_used": res.evals_used, "stop_reason": res.stop_reason, "hypervolume": hv}))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    if not args.out:
        raise ConfigError("no output directory (--out)")
    manifests = [manifest_from(path, _overrides(args, compare=True)) for path in args.manifests]
    first = manifests[0]
    spaces = [space_to_doc(build_space(str(m.space))) for m in manifests]
    if any(s != spaces[0] for s in spaces[1:]):
        raise ConfigError("manifests do not share one search space")
    if any(str(m.objective) != str(first.objective) or m.surrogate_seed != first.surrogate_seed for m in manifests[1:]):
        raise ConfigError("manifests do not share one objective")
    labels: list[str] = []
    for m in manifests:
        label = m.label or m.algorithm
        while label in labels:
            label += "'"
        labels.append(label)

    runs = []
    for m, label in zip(manifests, labels):
        log.info("running %s", label)
        res, space, _ = execute(m)
        runs.append((label, m, res))
    ref = reference_point(*[[o.objectives for o in r.history] for _, _, r in runs])
    hvs = {label: hypervolume_2d(res.front_pairs(), ref) for label, _, res in runs}
    grid_hv = next((hvs[label] for label, m, _ in runs if m.algorithm == "grid"), None)

    table = io.StringIO()
    w = csv.writer(table, lineterminator="\n")
    header = ["label", "algorithm", "seed", "evals_used", "front_size", "hypervolume"]
    if grid_hv is not None:
        header.append("hv_ratio")
    header += ["wall_time", "stop_reason"]
    w.writerow(header)
    for label, m, res in runs:
        row = [label, m.algorithm, m.seed, res.evals_used, len(res.front), repr(hvs[label])]
        if grid_hv is not None:
            row.append(repr(hvs[label] / grid_hv) if grid_hv > 0 else "")
        row += [f"{res.wall_time:.6f}", res.stop_reason]
        w.writerow(row)

    points = io.StringIO()
    w = csv.writer(points, lineterminator="\n")
    w.writerow(["label", "algorithm", "eval_index", "err", "eng", "on_front"])
    for label, m, res in runs:
        front = {o.eval_index for o in res.front}
        for o in res.history:
            w.writerow([label, m.algorithm, o.eval_index, repr(o.objectives.err), repr(o.objectives.eng), int(o.eval_index in front)])

    _write_outputs(Path(args.out), {"compare.csv": table.getvalue(), "points.csv": points.getvalue(),
                                    "reference.json": json.dumps({"reference_point": list(ref)}) + "\n"})
    sys.stdout.write(table.getvalue())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    overrides = _overrides(args)
    overrides.setdefault("algorithm", "grid")
    m = manifest_from(args.config, overrides)
    findings: list[str] = []
    try:
        space = build_space(str(m.space))
    except ConfigError as exc:
        findings.append(str(exc))
        space = None
    if space is not None:
        print(space.cardinality)
        spec = str(m.objective)
        if spec.startswith("table:"):
            path = spec[6:]
            try:
                _, problems = check_table(Path(path), space)
                findings += [f"{path}: {p}" for p in problems]
            except FileNotFoundError:
                findings.append(f"{path}: file not found")
        else:
            try:
                build_objective(spec, space, m.surrogate_seed)
            except ConfigError as exc:
                findings.append(str(exc))
    for f in findings:
        print(json.dumps({"finding": f}), file=sys.stderr)
    return 0 if not findings else EXIT_CONFIG


# -- argument parsing --------------------------------------------------------


def _overrides(args: argparse.Namespace, compare: bool = False) -> dict:
    out: dict[str, Any] = {}
    simple = ["space", "objective", "seed", "max_evals", "surrogate_seed"]
    if not compare:
        simple += ["algorithm", "out"]
    for key in simple:
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    if getattr(args, "ref", None) is not None:
        out["reference_point"] = list(args.ref)
    pabo = {}
    if getattr(args, "pabo_stop_eps", None) is not None:
        pabo["stop_epsilon"] = args.pabo_stop_eps
    if getattr(args, "no_supervisor", False):
        pabo["supervisor"] = False
    if getattr(args, "pabo_ard", False):
        pabo["ard"] = True
    if pabo:
        out["pabo"] = pabo
    nsga = {}
    if getattr(args, "nsga2_pop", None) is not None:
        nsga["pop_size"] = args.nsga2_pop
    if getattr(args, "nsga2_gens", None) is not None:
        nsga["max_generations"] = args.nsga2_gens
    if nsga:
        out["nsga2"] = nsga
    return out


def _common(p: argparse.ArgumentParser, compare: bool = False) -> None:
    p.add_argument("--space", help="space YAML file or case:<name>")
    p.add_argument("--objective", help="objective spec, e.g. table:grid.csv")
    if not compare:
        p.add_argument("--config", help="manifest YAML; flags override its keys")
        p.add_argument("--algo", dest="algorithm", choices=ALGORITHMS)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--surrogate-seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--ref", type=float, nargs=2, metavar=("ERR", "ENG"), help="declared hypervolume reference point")
    p.add_argument("--pabo-stop-eps", type=float)
    p.add_argument("--no-supervisor", action="store_true", help="ablation: disable cross-feeding")
    p.add_argument("--pabo-ard", action="store_true", help="per-dimension GP length scales")
    p.add_argument("--nsga2-pop", type=int)
    p.add_argument("--nsga2-gens", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pabo", description="Two-objective hyperparameter search (PABO and baselines).")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one algorithm and write history, front and summary")
    _common(run)
    run.set_defaults(func=cmd_run)
    cmp = sub.add_parser("compare", help="run several manifests on one objective and tabulate")
    cmp.add_argument("manifests", nargs="+")
    _common(cmp, compare=True)
    cmp.set_defaults(func=cmd_compare)
    val = sub.add_parser("validate", help="check a space and objective, print the cardinality")
    val.add_argument("--space")
    val.add_argument("--objective")
    val.add_argument("--config")
    val.add_argument("--surrogate-seed", type=int)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "command": args.command, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every failure becomes a machine-readable record
        log.debug("unhandled failure", exc_info=True)
        print(json.dumps({"error": type(exc).__name__, "command": args.command, "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
