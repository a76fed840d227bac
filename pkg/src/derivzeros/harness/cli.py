"""Command-line entry point: ``derivzeros <command> --config FILE ...``.

Exit codes: 0 success, 2 configuration error, 3 more than 10% of the
requested roots unconverged.  Other library failures exit with 1.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DerivZerosError, InvalidSpec, IoError
from ..pointsio import save_points
from ..potential import equilibrium_radial, frostman_check
from ..radial import potential_from_dict
from ..rng import child_seed
from ..rootfind import kth_derivative_roots
from .config import ExperimentConfig, load_config
from .experiments import UNCONVERGED_LIMIT, run_convergence, run_coulomb
from .pairing import pairing_stats
from .probes import probe_small_values, probe_tightness, tightness_medians
from .report import emit, emit_table, scatter_svg, to_json, write_text

log = logging.getLogger("derivzeros")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    kw = {}
    if args.seed is not None:
        kw["master_seed"] = args.seed
    if args.threads is not None:
        kw["threads"] = args.threads
    return cfg.with_(**kw) if kw else cfg


def _sample_first(cfg):
    n = cfg.n_grid[0]
    return cfg.spec(n).sample(child_seed(cfg.master_seed, n, 0))


def cmd_sample(cfg, args) -> int:
    p = _sample_first(cfg)
    path = save_points(Path(args.out) / "sample.txt", p)
    log.info("wrote %d points to %s", p.degree, path)
    return EXIT_OK


def cmd_roots(cfg, args) -> int:
    p = _sample_first(cfg)
    out = Path(args.out)
    save_points(out / "zeros.txt", p)
    summary = []
    bad = total = 0
    for k in cfg.k_list:
        res = kth_derivative_roots(p, k, cfg.aberth, raise_on_failure=False)
        save_points(out / f"zeros_k{k}.txt", res.roots)
        bad += res.n_unconverged
        total += res.roots.degree
        summary.append({"k": k, "iterations": res.iterations, **res.residual_stats,
                        "clusters": [[c.real, c.imag, m] for c, m in res.clusters]})
    write_text(out / "roots.json", to_json({"n": p.degree, "orders": summary}))
    return EXIT_NUMERIC if total and bad / total > UNCONVERGED_LIMIT else EXIT_OK


def cmd_converge(cfg, args) -> int:
    report = run_convergence(cfg)
    for path in emit(report, args.out, args.format):
        log.info("wrote %s", path)
    return EXIT_NUMERIC if report.unconverged_fraction > UNCONVERGED_LIMIT else EXIT_OK


def cmd_coulomb(cfg, args) -> int:
    res = run_coulomb(cfg)
    pts = res.pop("points")
    save_points(Path(args.out) / "coulomb_state.txt", pts)
    emit_table([res], args.out, args.format, "coulomb")
    return EXIT_OK


def cmd_probe_small(cfg, args) -> int:
    rows = [r.as_dict() for r in probe_small_values(cfg)]
    emit_table(rows, args.out, args.format, "probe_small")
    return EXIT_OK


def cmd_probe_tight(cfg, args) -> int:
    rows = probe_tightness(cfg)
    meta = {"median_by_n": {str(n): v for n, v in tightness_medians(rows).items()}}
    emit_table([r.as_dict() for r in rows], args.out, args.format, "probe_tight", meta)
    return EXIT_OK


def cmd_pairing(cfg, args) -> int:
    p = _sample_first(cfg)
    k = cfg.k_list[0]
    res = kth_derivative_roots(p, k, cfg.aberth, raise_on_failure=False)
    st = pairing_stats(p, res.roots)
    st["nearest"] = st["nearest"].tolist()
    out = Path(args.out)
    if args.format in ("json", "all"):
        write_text(out / "pairing.json", to_json(st))
    if args.format in ("csv", "all"):
        edges = st["hist_edges"]
        rows = [{"lo": edges[i], "hi": edges[i + 1], "count": c}
                for i, c in enumerate(st["hist_counts"])]
        emit_table(rows, out, "csv", "pairing_hist")
    if args.format in ("svg", "all"):
        title = f"zeros and zeros of P^({k}), n={p.degree}"
        write_text(out / "pairing_scatter.svg", scatter_svg(p.roots, res.roots.roots, title))
    return EXIT_OK


def cmd_equilibrium(cfg, args) -> int:
    pot_doc = cfg.ensemble.get("potential")
    if pot_doc is None:
        raise ConfigError("equilibrium needs an ensemble with a 'potential' section")
    eq = equilibrium_radial(potential_from_dict(pot_doc))
    r = np.linspace(eq.r_inner, eq.r_outer, 12)[1:-1]
    doc = eq.to_dict()
    doc.update({f"potential_{k}": v for k, v in doc.pop("potential").items()})
    doc = {**doc, "total_mass": eq.total_mass(),
           "frostman_max_deviation": float(np.abs(frostman_check(eq, r)).max())}
    emit_table([doc], args.out, args.format if args.format != "svg" else "json", "equilibrium")
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "roots": cmd_roots,
    "converge": cmd_converge,
    "coulomb": cmd_coulomb,
    "probe-small": cmd_probe_small,
    "probe-tight": cmd_probe_tight,
    "pairing": cmd_pairing,
    "equilibrium": cmd_equilibrium,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="derivzeros",
                                 description="Zeros of derivatives of random polynomials.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="override master_seed")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument("--format", default="all", choices=["csv", "json", "svg", "all"])
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _cfg(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidSpec) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except DerivZerosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
