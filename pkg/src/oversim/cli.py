"""Config-driven command-line front end.

Commands: fit, sweep, degrade, local, robust, obs2, explain.

Every parameter can come from (highest precedence first) a command-line
flag, a config file section ([common] plus one section per command; keys
are the long flag names), the environment (OVERSIM_OUT, OVERSIM_THREADS),
or the built-in default.  All randomness flows from --seed: the sweep and
fit are deterministic; degrade derives run seeds as seed XOR run; local
derives split seeds as seed XOR replication (corrections offset by
10007 * (subpopulation + 1)); robust corrects with seed + 1; explain's
policy uses seed + 2.

Exit codes: 0 ok, 2 usage, 3 validation (precondition violations, named
parameter in the message), 4 runtime.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    HOUSING_SENSITIVE,
    HOUSING_TARGET,
    bundled_housing_path,
    load_csv,
    split_train_test,
    standardize,
)
from .errors import OversimError, ValidationError
from .experiments import (
    degradation_curve,
    emit_explanation_report,
    local_strategies_table,
    weight_equivalence_sweep,
    ExplanationContext,
)
from .fairglm import (
    FitOptions,
    ValueWeights,
    decide_all,
    fit,
    load_model,
    save_model,
)
from .pdm import epsilon_budget, identity_policy, random_correct_gt
from .reporting import (
    Manifest,
    write_degradation_csv,
    write_score_matrix_csv,
    write_strategy_csv,
    write_sweep_csv,
    write_value_report_csv,
)
from .selection import (
    CandidateSet,
    PolicySet,
    build_observation2_instance,
    naive_select,
    placeholder_dataset,
    robust_select,
)
from .values import value_report

COMMANDS = ("fit", "sweep", "degrade", "local", "robust", "obs2", "explain")

# built-in defaults, applied after flags and config file
_DEFAULTS = {
    "data": None,  # bundled dataset
    "target": HOUSING_TARGET,
    "sensitive": ",".join(HOUSING_SENSITIVE),
    "out": ".",
    "seed": 0,
    "threads": 1,
    "plots": False,
    "max_iters": 5000,
    "tol": 1e-6,
    "ridge": 1e-6,
    "step_rule": "backtracking",
    "step_size": 1.0,
    "init": "zeros",
    "weights": None,
    "w_star": None,
    "tau": 0.01,
    "grid": "0:1:30x0:1:30",
    "ks": "auto",
    "runs": 1000,
    "attr": None,  # first sensitive attribute
    "threshold": 50.0,
    "p": 20.0,
    "replications": 100,
    "candidates": None,
    "eps": 0.1,
    "n": 1000,
    "delta": 0.01,
    "scope": None,
    "policy": None,
    "model": None,
    "limit": None,
}

_ENV = {"out": "OVERSIM_OUT", "threads": "OVERSIM_THREADS"}

_CONVERT = {
    "seed": int, "threads": int, "max_iters": int, "runs": int,
    "replications": int, "n": int, "limit": int,
    "tol": float, "ridge": float, "step_size": float, "tau": float,
    "threshold": float, "p": float, "eps": float, "delta": float,
    "plots": lambda s: s if isinstance(s, bool) else s.strip().lower() in ("1", "true", "yes", "on"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oversim",
        description="Simulate algorithmic decision-making under human oversight.",
    )
    parser.add_argument("--version", action="version", version=f"oversim {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--config", help="INI config file ([common] plus per-command sections)")
        p.add_argument("--data", help="CSV path (default: bundled housing table)")
        p.add_argument("--target", help="target column name")
        p.add_argument("--sensitive", help="comma-separated sensitive column names")
        p.add_argument("--out", help="output directory (env OVERSIM_OUT)")
        p.add_argument("--seed", type=int, help="base seed for all randomness")
        p.add_argument("--threads", type=int, help="worker cap, 1 = serial (env OVERSIM_THREADS)")
        p.add_argument("--max-iters", type=int, dest="max_iters", help="solver iteration cap")
        p.add_argument("--tol", type=float, help="solver subgradient-norm tolerance")
        p.add_argument("--ridge", type=float, help="solver ridge strength")
        p.add_argument("--step-rule", dest="step_rule", choices=("backtracking", "fixed"))
        p.add_argument("--step-size", type=float, dest="step_size", help="initial/fixed step")
        p.add_argument("--init", choices=("zeros", "gaussian"), help="solver initialization")

    p = sub.add_parser("fit", help="fit one model and report its training values")
    add_common(p)
    p.add_argument("--weights", help="comma-separated penalty weights, one per sensitive attr")

    p = sub.add_parser("sweep", help="weight-equivalence sweep over a grid")
    add_common(p)
    p.add_argument("--w-star", dest="w_star", help="reference weight vector, comma-separated")
    p.add_argument("--tau", type=float, help="equivalence threshold on deviation fraction")
    p.add_argument("--grid", help="per-dimension min:max:steps joined by x, e.g. 0:1:30x0:1:30")
    p.add_argument("--plots", action="store_true", default=None, help="also write SVG plots")

    p = sub.add_parser("degrade", help="correction-degradation curves")
    add_common(p)
    p.add_argument("--w-star", dest="w_star", help="reference weight vector")
    p.add_argument("--ks", help="comma-separated correction counts starting at 0, or 'auto'")
    p.add_argument("--runs", type=int, help="Monte Carlo runs")
    p.add_argument("--plots", action="store_true", default=None, help="also write an SVG plot")

    p = sub.add_parser("local", help="global vs local override strategies table")
    add_common(p)
    p.add_argument("--w-star", dest="w_star", help="reference weight vector")
    p.add_argument("--attr", help="partition attribute (name or index; default first sensitive)")
    p.add_argument("--threshold", type=float, help="partition threshold on the raw attribute")
    p.add_argument("--p", type=float, help="percent of each subpopulation corrected")
    p.add_argument("--replications", type=int, help="train/test split replications")

    p = sub.add_parser("robust", help="max-min candidate selection on a held-out split")
    add_common(p)
    p.add_argument("--candidates", help="candidate weight vectors: w1,w2;w1,w2;...")
    p.add_argument("--weights", help="selection weights for F (default: all zeros)")
    p.add_argument("--eps", type=float, help="override budget fraction for the correction policy")

    p = sub.add_parser("obs2", help="constructed instance where naive and robust choices differ")
    add_common(p)
    p.add_argument("--n", type=int, help="instance size")
    p.add_argument("--eps", type=float, help="override budget fraction")
    p.add_argument("--delta", type=float, help="accuracy gap bound")

    p = sub.add_parser("explain", help="emit an E1-E4 explanation report")
    add_common(p)
    p.add_argument("--scope", choices=("E1", "E2", "E3", "E4"))
    p.add_argument("--weights", help="penalty/selection weights (fit + E4 reports)")
    p.add_argument("--model", help="load a saved model instead of fitting")
    p.add_argument("--policy", help="identity | gt:K | eps:FRACTION (toward labels)")
    p.add_argument("--limit", type=int, help="cap the number of reported rows")
    return parser


def _load_config(path: str, command: str) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ValidationError(f"--config: cannot read {path!r}")
    values = {}
    for section in ("common", command):
        if not cp.has_section(section):
            continue
        for key, val in cp.items(section):
            key = key.replace("-", "_")
            if key not in _DEFAULTS:
                raise ValidationError(f"--config: unknown key {key!r} in section [{section}]")
            values[key] = val
    return values


def _resolve(args: argparse.Namespace) -> dict:
    """flag > config > environment > default, with type conversion."""
    config = _load_config(args.config, args.command) if args.config else {}
    cfg = {"command": args.command}
    for key, default in _DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None and key in config:
            value = config[key]
        if value is None and key in _ENV and os.environ.get(_ENV[key]):
            value = os.environ[_ENV[key]]
        if value is None:
            value = default
        if value is not None and key in _CONVERT and not isinstance(value, (int, float, bool)):
            try:
                value = _CONVERT[key](value)
            except ValueError:
                raise ValidationError(f"--{key.replace('_', '-')}: cannot parse {value!r}") from None
        cfg[key] = value
    return cfg


def _parse_weights(text: str, m: int, flag: str) -> ValueWeights:
    try:
        w = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise ValidationError(f"{flag}: cannot parse {text!r}") from None
    if w.size != m:
        raise ValidationError(f"{flag}: expected {m} entries, got {w.size}")
    return ValueWeights(w)


def _parse_grid(text: str):
    dims = []
    for part in text.split("x"):
        pieces = part.split(":")
        if len(pieces) != 3:
            raise ValidationError(f"--grid: expected min:max:steps, got {part!r}")
        try:
            dims.append((float(pieces[0]), float(pieces[1]), int(pieces[2])))
        except ValueError:
            raise ValidationError(f"--grid: cannot parse {part!r}") from None
    return dims


def _fit_options(cfg: dict) -> FitOptions:
    return FitOptions(
        max_iters=cfg["max_iters"],
        tolerance=cfg["tol"],
        step_rule=cfg["step_rule"],
        step_size=cfg["step_size"],
        ridge=cfg["ridge"],
        init=cfg["init"],
        seed=cfg["seed"],
    )


def _load_data(cfg: dict):
    path = cfg["data"] or bundled_housing_path()
    if not Path(path).exists():
        raise ValidationError(f"--data: no such file {str(path)!r}")
    sensitive = tuple(s.strip() for s in cfg["sensitive"].split(",") if s.strip())
    if not sensitive:
        raise ValidationError("--sensitive: need at least one column name")
    table = load_csv(path, cfg["target"], sensitive)
    return standardize(table)


def _outdir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(cfg: dict, out: Path, keys, extra: dict | None = None) -> Manifest:
    params = {k: cfg[k] for k in ("data", "target", "sensitive", "seed", "threads", *keys)}
    params["data"] = str(params["data"] or bundled_housing_path())
    if extra:
        params.update(extra)
    man = Manifest(out / f"{cfg['command']}_manifest.txt", cfg["command"], params)
    man.write()
    return man


def _sensitive_names(data) -> tuple[str, ...]:
    return tuple(data.feature_names[j] for j in data.sensitive)


def _cmd_fit(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["weights"] is None:
        raise ValidationError("--weights is required for fit")
    weights = _parse_weights(cfg["weights"], len(data.sensitive), "--weights")
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("weights", "max_iters", "tol", "ridge", "step_rule", "init"))
    model = fit(data, weights, _fit_options(cfg))
    save_model(model, out / "model.txt")
    rep = value_report(data, decide_all(model, data.X), data.y, weights)
    write_value_report_csv(rep, _sensitive_names(data), out / "fit_report.csv")
    man.complete()
    print(
        f"fit: iterations={model.fit_info.iterations} stop={model.fit_info.stop_reason} "
        f"objective={model.fit_info.objective:.6f}"
    )
    print(f"fit: accuracy={rep.accuracy:.4f} rho={[round(r, 4) for r in rep.rho]} F={rep.F:.4f}")
    print(f"fit: wrote {out / 'model.txt'} and {out / 'fit_report.csv'}")
    return 0


def _cmd_sweep(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["w_star"] is None:
        raise ValidationError("--w-star is required for sweep")
    w_star = _parse_weights(cfg["w_star"], len(data.sensitive), "--w-star")
    grid_spec = _parse_grid(cfg["grid"])
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("w_star", "tau", "grid", "max_iters", "tol"))
    result = weight_equivalence_sweep(
        data, w_star, grid_spec, cfg["tau"], _fit_options(cfg), threads=cfg["threads"]
    )
    write_sweep_csv(result, out / "sweep.csv")
    if cfg["plots"] and result.grid.shape[1] == 2:
        from .plots import sweep_heatmap_svg, sweep_scatter_svg

        sweep_scatter_svg(result, out / "sweep_scatter.svg")
        sweep_heatmap_svg(result, out / "sweep_heatmap.svg")
    man.complete()
    print(
        f"sweep: {result.grid.shape[0]} grid points, {len(result.equivalent_set)} equivalent "
        f"(tau={result.tau:g}), {len(result.failed)} failed"
    )
    print(f"sweep: wrote {out / 'sweep.csv'}")
    return 0


def _cmd_degrade(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["w_star"] is None:
        raise ValidationError("--w-star is required for degrade")
    w_star = _parse_weights(cfg["w_star"], len(data.sensitive), "--w-star")
    opts = _fit_options(cfg)
    if cfg["ks"] == "auto":
        model = fit(data, w_star, opts)
        errors = int(np.sum(decide_all(model, data.X) != data.y))
        ks = sorted(set(int(round(v)) for v in np.linspace(0, max(errors, 1), 11)))
    else:
        try:
            ks = [int(t) for t in cfg["ks"].split(",")]
        except ValueError:
            raise ValidationError(f"--ks: cannot parse {cfg['ks']!r}") from None
    out = _outdir(cfg)
    man = _manifest(
        cfg,
        out,
        ("w_star", "runs", "max_iters", "tol"),
        extra={"ks": ",".join(str(k) for k in ks)},
    )
    curve = degradation_curve(data, w_star, ks, cfg["runs"], cfg["seed"], opts)
    write_degradation_csv(curve, out / "degrade.csv")
    if cfg["plots"]:
        from .plots import degradation_lines_svg

        degradation_lines_svg(curve, out / "degrade.svg")
    man.complete()
    final = {n: round(float(curve.mean_change[i, -1]), 4) for i, n in enumerate(curve.sensitive_names)}
    print(f"degrade: runs={curve.runs} ks={list(curve.ks)} mean change at max k: {final}")
    print(f"degrade: wrote {out / 'degrade.csv'}")
    return 0


def _cmd_local(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["w_star"] is None:
        raise ValidationError("--w-star is required for local")
    w_star = _parse_weights(cfg["w_star"], len(data.sensitive), "--w-star")
    attr = cfg["attr"]
    if attr is None:
        attr_index = data.sensitive[0]
    elif str(attr).lstrip("-").isdigit():
        attr_index = int(attr)
    else:
        if attr not in data.feature_names:
            raise ValidationError(f"--attr: no feature column named {attr!r}")
        attr_index = data.feature_names.index(attr)
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("w_star", "attr", "threshold", "p", "replications"))
    man.params["attr"] = data.feature_names[attr_index]
    table = local_strategies_table(
        data,
        w_star,
        attr_index,
        cfg["threshold"],
        p_percent=cfg["p"],
        replications=cfg["replications"],
        base_seed=cfg["seed"],
        opts=_fit_options(cfg),
        threads=cfg["threads"],
    )
    write_strategy_csv(table, _sensitive_names(data), out / "local.csv")
    man.complete()
    for row in table.rows:
        rhos = " ".join(
            f"rho_{n}={mu:.3f}+-{se:.3f}"
            for n, mu, se in zip(_sensitive_names(data), row.rho_mean, row.rho_se)
        )
        print(f"local: {row.name:16s} {rhos} accuracy={row.accuracy_mean:.4f}+-{row.accuracy_se:.4f}")
    print(f"local: wrote {out / 'local.csv'}")
    return 0


def _cmd_robust(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["candidates"] is None:
        raise ValidationError("--candidates is required for robust")
    m = len(data.sensitive)
    cand_weights = [
        _parse_weights(part, m, "--candidates") for part in cfg["candidates"].split(";") if part
    ]
    if not cand_weights:
        raise ValidationError("--candidates: need at least one weight vector")
    sel_weights = (
        _parse_weights(cfg["weights"], m, "--weights")
        if cfg["weights"] is not None
        else ValueWeights(np.zeros(m))
    )
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("candidates", "weights", "eps", "max_iters", "tol"))
    sp = split_train_test(data, 0.2, seed=cfg["seed"])
    opts = _fit_options(cfg)
    decisions = []
    for i, w in enumerate(cand_weights):
        model = fit(sp.train, w, opts)
        decisions.append((f"A{i + 1}[{','.join(f'{v:g}' for v in w.w)}]", decide_all(model, sp.test.X)))
    cands = CandidateSet(candidates=tuple(decisions), labels=sp.test.y)
    budget = int(np.floor(cfg["eps"] * sp.test.n))
    policies = PolicySet(
        per_candidate=tuple(
            (identity_policy(), random_correct_gt(budget, seed=cfg["seed"] + 1, label=f"gt-correct-{budget}"))
            for _ in cand_weights
        )
    )
    naive = naive_select(cands, sel_weights, sp.test)
    winner, matrix = robust_select(cands, policies, sel_weights, sp.test)
    write_score_matrix_csv(cands, matrix, out / "robust.csv")
    man.complete()
    for (name, _), row in zip(cands.candidates, matrix):
        print(f"robust: {name}: F per policy {[round(v, 4) for v in row]} min {min(row):.4f}")
    print(f"robust: naive winner {cands.candidates[naive][0]}, robust winner {cands.candidates[winner][0]}")
    print(f"robust: wrote {out / 'robust.csv'}")
    return 0


def _cmd_obs2(cfg: dict) -> int:
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("n", "eps", "delta"))
    cands, policies = build_observation2_instance(cfg["n"], cfg["eps"], cfg["delta"])
    context = placeholder_dataset(cands.labels)
    weights = ValueWeights(np.zeros(0))
    naive = naive_select(cands, weights, context)
    winner, matrix = robust_select(cands, policies, weights, context)
    write_score_matrix_csv(cands, matrix, out / "obs2.csv")
    man.complete()
    for (name, dec), row in zip(cands.candidates, matrix):
        acc = float(np.mean(dec == cands.labels))
        print(f"obs2: {name}: accuracy {acc:.4f}, worst-case F {min(row):.4f}")
    print(f"obs2: naive winner {cands.candidates[naive][0]}, robust winner {cands.candidates[winner][0]}")
    print(f"obs2: wrote {out / 'obs2.csv'}")
    return 0


def _parse_policy(spec: str, labels, seed: int):
    if spec == "identity":
        return identity_policy()
    kind, _, arg = spec.partition(":")
    if kind == "gt":
        try:
            return random_correct_gt(int(arg), seed=seed + 2, label=f"gt-correct-{arg}")
        except ValueError:
            raise ValidationError(f"--policy: cannot parse count in {spec!r}") from None
    if kind == "eps":
        try:
            return epsilon_budget(labels, float(arg), label=f"eps-budget-{arg}")
        except ValueError:
            raise ValidationError(f"--policy: cannot parse fraction in {spec!r}") from None
    raise ValidationError(f"--policy: expected identity | gt:K | eps:FRACTION, got {spec!r}")


def _cmd_explain(cfg: dict) -> int:
    data = _load_data(cfg)
    if cfg["scope"] is None:
        raise ValidationError("--scope is required for explain")
    weights = (
        _parse_weights(cfg["weights"], len(data.sensitive), "--weights")
        if cfg["weights"] is not None
        else None
    )
    if cfg["model"] is not None:
        if not Path(cfg["model"]).exists():
            raise ValidationError(f"--model: no such file {cfg['model']!r}")
        model = load_model(cfg["model"])
    else:
        if weights is None:
            raise ValidationError("explain needs --weights (to fit) or --model")
        model = fit(data, weights, _fit_options(cfg))
    if cfg["limit"] is not None:
        if cfg["limit"] < 1:
            raise ValidationError("--limit must be >= 1")
        data = data.subset(np.arange(min(cfg["limit"], data.n)))
    policy = (
        _parse_policy(cfg["policy"], data.y, cfg["seed"]) if cfg["policy"] is not None else None
    )
    out = _outdir(cfg)
    man = _manifest(cfg, out, ("scope", "weights", "policy", "model", "limit"))
    report = emit_explanation_report(
        cfg["scope"], ExplanationContext(model=model, data=data, weights=weights, policy=policy)
    )
    with open(out / "explain_report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    man.complete()
    print(f"explain: scope {cfg['scope']}, {report['n']} rows -> {out / 'explain_report.json'}")
    return 0


_RUNNERS = {
    "fit": _cmd_fit,
    "sweep": _cmd_sweep,
    "degrade": _cmd_degrade,
    "local": _cmd_local,
    "robust": _cmd_robust,
    "obs2": _cmd_obs2,
    "explain": _cmd_explain,
}


def parse_and_run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = _resolve(args)
        return _RUNNERS[args.command](cfg)
    except OversimError as exc:
        print(f"oversim {args.command}: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort runtime mapping
        print(f"oversim {args.command}: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(parse_and_run(sys.argv[1:]))


if __name__ == "__main__":
    main()
