"""Command-line pipeline: dependence selection, vine sampling, plate solves,
surrogate training, Monte Carlo runs and evaluator timing.

Every command is deterministic given (config, seed) and writes a
manifest.json with checksums of its outputs; `vsuq verify` re-checks them.
Exit codes: 0 success, 1 numerical failure, 2 usage/parse error,
3 missing upstream artifact.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import mcs as _mcs
from . import reanalysis as _ra
from ._io import (
    sha256_bytes,
    write_csv,
    write_json,
    write_manifest,
    verify_manifest,
)
from .backend import BACKEND_NAME, set_threads
from .dvine import sample as vine_sample, push_to_marginals, spec_from_taus
from .errors import ConfigError, DependencyError, VsuqError
from .families import copula_family_from_name, marginal_family_from_name
from .fem.model import model_from_config
from .marginals import MarginalModel
from .mcs import McsConfig
from .selection import build_pool, read_pairs_csv, select
from .surrogate import TrainConfig, load_net, save_net, train

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_DEPENDENCY = 3


def _load_config(path) -> tuple[dict, str]:
    p = Path(path)
    if not p.exists():
        raise DependencyError(f"missing config file {p}")
    raw = p.read_bytes()
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    return cfg, sha256_bytes(raw)


def _vine_spec(cfg: dict):
    vine = cfg.get("vine")
    if not vine:
        raise ConfigError("config is missing the 'vine' section")
    d = len(cfg.get("plies", []))
    if d < 2:
        raise ConfigError("need at least 2 plies for a vine")
    family = copula_family_from_name(vine.get("family", "frank"))
    return spec_from_taus(d, vine["tree1_taus"], vine.get("deep_tau", 0.0), family)


def _deviation_marginal(cfg: dict) -> tuple[MarginalModel, str]:
    dev = cfg.get("deviation_marginal", {})
    fam = marginal_family_from_name(dev.get("family", "gauss"))
    params = tuple(dev.get("params", (0.0, 0.2)))
    return MarginalModel(fam, params), dev.get("unit", "rad")


def _mcs_config(cfg: dict, args, evaluator=None) -> McsConfig:
    marginal, unit = _deviation_marginal(cfg)
    mcfg = cfg.get("mcs", {})
    seed = args.seed if args.seed is not None else mcfg.get("seed", 0)
    return McsConfig(
        spec=_vine_spec(cfg),
        marginal=marginal,
        n_samples=int(mcfg.get("samples", 10_000)),
        seed=int(seed),
        evaluator=evaluator or mcfg.get("evaluator", "reanalysis"),
        unit=unit,
        basis_size=int(cfg.get("reanalysis", {}).get("basis_size",
                                                     _ra.DEFAULT_BASIS_SIZE)),
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _net_path(args, out: Path) -> Path:
    if getattr(args, "net", None):
        return Path(args.net)
    return out / "net.json"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_select(args) -> int:
    t_start = time.perf_counter()
    data = read_pairs_csv(args.data)
    marginals = [marginal_family_from_name(s) for s in args.marginals.split(",")]
    copulas = [copula_family_from_name(s) for s in args.copulas.split(",")]
    pool = build_pool(marginals, copulas, data,
                      allow_equal_marginals=args.allow_equal_marginals)
    result = select(pool, data)
    out = _out_dir(args)
    doc = result.to_json_dict()
    doc["pool_size"] = len(pool)
    doc["allow_equal_marginals"] = bool(args.allow_equal_marginals)
    write_json(out / "selection.json", doc)
    write_manifest(out, config_hash=sha256_bytes(Path(args.data).read_bytes()),
                   seed=None,
                   timings={"select": time.perf_counter() - t_start},
                   outputs=["selection.json"])
    print(f"best candidate: {result.names[result.best]} "
          f"(weight {result.weights[result.best]:.6f})")
    return EXIT_OK


def cmd_sample(args) -> int:
    t_start = time.perf_counter()
    cfg, cfg_hash = _load_config(args.config)
    spec = _vine_spec(cfg)
    marginal, unit = _deviation_marginal(cfg)
    n = args.n if args.n is not None else cfg.get("mcs", {}).get("samples", 10_000)
    if n < 1:
        raise ConfigError("sample count must be >= 1")
    seed = args.seed if args.seed is not None else cfg.get("mcs", {}).get("seed", 0)
    batch = vine_sample(spec, int(n), int(seed))
    out = _out_dir(args)
    batch.to_csv(out / "samples.csv")
    dev = push_to_marginals(batch, marginal)
    write_csv(out / "deviations.csv",
              ",".join(f"ply{j + 1}_{unit}" for j in range(spec.d)), dev)
    write_manifest(out, config_hash=cfg_hash, seed=int(seed),
                   timings={"sample": time.perf_counter() - t_start},
                   outputs=["samples.csv", "deviations.csv"])
    print(f"wrote {n} x {spec.d} samples (seed {seed})")
    return EXIT_OK


def _parse_deviations(text, n_plies, unit):
    if text is None:
        return np.zeros(n_plies)
    vals = np.array([float(v) for v in text.split(",")])
    if vals.size != n_plies:
        raise ConfigError(f"--deviations needs {n_plies} values")
    return np.radians(vals) if unit == "deg" else vals


def cmd_solve(args) -> int:
    t_start = time.perf_counter()
    cfg, cfg_hash = _load_config(args.config)
    model = model_from_config(cfg)
    _, unit = _deviation_marginal(cfg)
    eps = _parse_deviations(args.deviations, model.plies.n_plies, unit)
    r = model.solve_full(eps)
    out = _out_dir(args)
    write_csv(out / "displacement.csv", "x,y,u,v,w,theta_x,theta_y",
              model.displacement_table(r))
    write_csv(out / "mesh_elements.csv", "n1,n2,n3,n4", model.mesh.elements)
    resp = model.responses(r)
    write_json(out / "response.json",
               {"max_abs_u": resp[0], "max_abs_v": resp[1],
                "backend": BACKEND_NAME})
    write_manifest(out, config_hash=cfg_hash, seed=args.seed,
                   timings={"solve": time.perf_counter() - t_start},
                   outputs=["displacement.csv", "mesh_elements.csv",
                            "response.json"])
    print(f"max|u| = {resp[0]:.6e}, max|v| = {resp[1]:.6e}")
    return EXIT_OK


def _training_data(cfg, model, seed):
    """Reanalysis-labeled deviation samples for surrogate training."""
    sur = cfg.get("surrogate", {})
    n = int(sur.get("train_samples", 10_000))
    mc = _mcs_config(cfg, argparse.Namespace(seed=seed), evaluator="reanalysis")
    mc = McsConfig(mc.spec, mc.marginal, n, mc.seed, "reanalysis", mc.unit,
                   mc.basis_size)
    result = _mcs.run(mc, model)
    return result.deviations[result.sample_indices], result.responses


def cmd_train(args) -> int:
    t_start = time.perf_counter()
    cfg, cfg_hash = _load_config(args.config)
    model = model_from_config(cfg)
    sur = cfg.get("surrogate", {})
    seed = args.seed if args.seed is not None else sur.get("train_seed", 0)
    t0 = time.perf_counter()
    x, y = _training_data(cfg, model, seed)
    t_label = time.perf_counter() - t0
    tc = TrainConfig(
        hidden=int(sur.get("hidden", 34)),
        epochs=int(sur.get("epochs", 3000)),
        learning_rate=float(sur.get("learning_rate", 0.2)),
        momentum=float(sur.get("momentum", 0.9)),
        lr_decay=float(sur.get("lr_decay", 0.9995)),
        seed=int(seed),
    )
    t0 = time.perf_counter()
    net, report = train(x, y, tc)
    t_train = time.perf_counter() - t0
    out = _out_dir(args)
    save_net(net, out / "net.json", seed=tc.seed,
             metrics_dict={"test_acc": list(report.test_acc),
                           "test_r2": list(report.test_r2)})
    report.to_csv(out / "training_report.csv")
    write_manifest(out, config_hash=cfg_hash, seed=tc.seed,
                   timings={"labeling": t_label, "training": t_train,
                            "total": time.perf_counter() - t_start},
                   outputs=["net.json", "training_report.csv"])
    print(f"test acc per response: {[f'{a:.4f}' for a in report.test_acc]}, "
          f"R2: {[f'{r:.4f}' for r in report.test_r2]}")
    return EXIT_OK


def cmd_mcs(args) -> int:
    t_start = time.perf_counter()
    cfg, cfg_hash = _load_config(args.config)
    model = model_from_config(cfg)
    mc = _mcs_config(cfg, args, evaluator=args.evaluator)
    net = None
    if mc.evaluator == "surrogate":
        net_path = _net_path(args, _out_dir(args))
        if not net_path.exists():
            raise DependencyError(
                f"surrogate evaluator requires a trained net; missing {net_path}")
        net = load_net(net_path)
    result = _mcs.run(mc, model, net=net)
    summary = _mcs.summarize(result)
    out = _out_dir(args)
    write_csv(out / "responses.csv", "sample,x,y",
              np.column_stack([result.sample_indices, result.responses]))
    write_csv(out / "running_mean.csv", "sample,x,y",
              np.column_stack([result.sample_indices, result.running_mean]))
    outputs = ["responses.csv", "running_mean.csv", "summary.json",
               "summary_table.csv"]
    for k, name in enumerate(_mcs.RESPONSE_NAMES[: result.responses.shape[1]]):
        hist = summary["histograms"][name]
        rows = np.column_stack([hist["edges"][:-1], hist["edges"][1:],
                                hist["counts"], hist["normalized"]])
        write_csv(out / f"histogram_{name}.csv",
                  "bin_left,bin_right,count,normalized", rows)
        v, p = _mcs.empirical_cdf(result.responses[:, k])
        write_csv(out / f"ecdf_{name}.csv", "value,probability",
                  np.column_stack([v, p]))
        outputs += [f"histogram_{name}.csv", f"ecdf_{name}.csv"]
    rows = [[name.upper(), t["Mean"], t["Variance"], t["Bandwidth"]]
            for name, t in summary["responses"].items()]
    write_csv(out / "summary_table.csv", "Response,Mean,Variance,Bandwidth", rows)
    write_json(out / "summary.json", summary | {"config_echo": cfg})
    write_manifest(out, config_hash=cfg_hash, seed=mc.seed,
                   timings={"mcs": time.perf_counter() - t_start,
                            "per_iteration": result.per_iteration},
                   outputs=outputs)
    for name, t in summary["responses"].items():
        print(f"{name}: Mean={t['Mean']:.6e} Variance={t['Variance']:.6e} "
              f"Bandwidth={t['Bandwidth']:.6e}")
    return EXIT_OK


def cmd_compare(args) -> int:
    t_start = time.perf_counter()
    cfg, cfg_hash = _load_config(args.config)
    model = model_from_config(cfg)
    mc = _mcs_config(cfg, args)
    net_path = _net_path(args, _out_dir(args))
    if not net_path.exists():
        raise DependencyError(
            f"evaluator comparison requires a trained net; missing {net_path}")
    net = load_net(net_path)
    table = _mcs.compare_evaluators(mc, model, net, iterations=args.iterations)
    out = _out_dir(args)
    write_csv(out / "efficiency.csv",
              "evaluator,mean_iteration_seconds,speedup_vs_full",
              [[row["evaluator"], row["mean_iteration_seconds"],
                row["speedup_vs_full"]] for row in table])
    write_manifest(out, config_hash=cfg_hash, seed=mc.seed,
                   timings={"compare": time.perf_counter() - t_start},
                   outputs=["efficiency.csv"])
    for row in table:
        print(f"{row['evaluator']:>10}: {row['mean_iteration_seconds']:.6e} s "
              f"({row['speedup_vs_full']:.1f}x)")
    return EXIT_OK


def cmd_verify(args) -> int:
    manifest = Path(args.out) / "manifest.json"
    if not manifest.exists():
        raise DependencyError(f"missing manifest {manifest}")
    bad = verify_manifest(manifest)
    if bad:
        print(f"checksum mismatch: {', '.join(bad)}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("all outputs verified")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vsuq",
        description="Coupled uncertainty analysis of variable-stiffness "
                    "composite plates")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for the JIT backend")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="case config JSON")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("select", help="score marginal/copula candidates on paired data")
    p.add_argument("data", help="two-column CSV with a header row")
    p.add_argument("--marginals", default="gauss,gamma,lognormal")
    p.add_argument("--copulas", default="frank,clayton,gumbel,gauss,fgm")
    p.add_argument("--allow-equal-marginals", action="store_true")
    common(p, config=False)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("sample", help="draw dependent deviation samples")
    p.add_argument("--n", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("solve", help="full plate solve at fixed deviations")
    p.add_argument("--deviations", default=None,
                   help="comma-separated per-ply deviations in config units")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="train the displacement surrogate")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("mcs", help="Monte Carlo response distribution")
    p.add_argument("--evaluator", choices=list(_mcs.EVALUATORS), default=None)
    p.add_argument("--net", default=None, help="trained net JSON")
    common(p)
    p.set_defaults(func=cmd_mcs)

    p = sub.add_parser("compare", help="per-iteration evaluator timing table")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--net", default=None, help="trained net JSON")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="check output checksums against manifest")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None:
        set_threads(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DependencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    except VsuqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
