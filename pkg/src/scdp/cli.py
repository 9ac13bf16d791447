"""Command-line experiment driver.

Subcommands::

    analyze         analytic p_c / p_s / SCDP per scheme across the sweep
    simulate        Monte Carlo estimates next to the analytic values
    optimize-rates  optimal redundant rates per scheme
    optimize-phi    two-step design: rates, then the optimal cache split
    sweep           generic driver; runs the task named in [sweep]

Output is plot-ready CSV (or JSON lines): '#'-prefixed metadata, one
header row, then data rows.  All commands are deterministic given the
config file and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from scdp import __version__, analytics, montecarlo
from scdp.caching import ScdpTriple, end_to_end_design, scdp_overall
from scdp.config import ConfigError, ExperimentConfig, apply_sweep_value, load_config
from scdp.montecarlo import TrialBatch
from scdp.numerics import NumericError
from scdp.rates import ao_solve_ot_rates, make_jt_problem, make_ot_problem
from scdp.rates import scdp_ot as ot_scdp_at
from scdp.rates import solve_cm_rate, solve_jt_rate, solve_ot_uniform_rate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_SCHEMES = ("JT", "OT", "CM")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _write(columns, rows, meta, out_path, fmt):
    if fmt == "csv":
        lines = [f"# {key}: {val}" for key, val in meta.items()]
        lines.append("# columns: " + " ".join(f"{i + 1}:{c}" for i, c in enumerate(columns)))
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
        text = "\n".join(lines) + "\n"
    else:
        payload = [json.dumps({"meta": meta}, sort_keys=True)]
        for row in rows:
            payload.append(
                json.dumps({c: row.get(c, None) for c in columns}, sort_keys=True)
            )
        text = "\n".join(payload) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(cfg: ExperimentConfig, command: str) -> dict:
    return {
        "scdp-version": __version__,
        "command": command,
        "config-sha256": cfg.config_hash,
        "seed": cfg.simulation.seed,
    }


def _sweep_points(cfg: ExperimentConfig):
    """(label, value, value2, derived config) tuples across the sweep grid."""
    if cfg.sweep is None:
        yield ("", "", None, cfg)
        return
    sw = cfg.sweep
    for v1 in sw.values():
        cfg1 = apply_sweep_value(cfg, sw.variable, v1)
        if sw.variable2 is None:
            yield (sw.variable, v1, None, cfg1)
        else:
            for v2 in sw.values2():
                yield (sw.variable, v1, v2, apply_sweep_value(cfg1, sw.variable2, v2))


def _per_point_batch(cfg: ExperimentConfig, index: int) -> TrialBatch:
    sim = cfg.simulation
    return TrialBatch(
        seed=sim.seed + 9973 * index,
        n_trials=sim.n_trials,
        window_radius=sim.window_radius,
        workers=sim.workers,
    )


def cmd_analyze(cfg: ExperimentConfig):
    if cfg.rates.mode != "fixed":
        raise ConfigError("[rates] analyze needs mode = fixed (use optimize-rates)")
    two_d = cfg.sweep is not None and cfg.sweep.variable2 is not None
    columns = ["sweep_var"] + (["sweep_var2"] if two_d else []) + [
        "scheme",
        "eve_model",
        "p_c",
        "p_s",
        "scdp",
    ]
    rows = []
    for _, v1, v2, cfg_i in _sweep_points(cfg):
        net = cfg_i.network()
        policies = cfg_i.policies()
        for scheme in _SCHEMES:
            m = analytics.scheme_metrics(
                net,
                policies[scheme],
                scheme,
                cfg_i.eve_model,
                approx=cfg_i.approx,
                delta=cfg_i.content.delta,
            )
            row = {
                "sweep_var": v1,
                "scheme": scheme,
                "eve_model": cfg_i.eve_model,
                "p_c": m.p_c,
                "p_s": m.p_s,
                "scdp": m.scdp,
            }
            if two_d:
                row["sweep_var2"] = v2
            rows.append(row)
    return columns, rows


def cmd_simulate(cfg: ExperimentConfig):
    if cfg.rates.mode != "fixed":
        raise ConfigError("[rates] simulate needs mode = fixed")
    columns = [
        "sweep_var",
        "scheme",
        "eve_model",
        "metric",
        "estimate",
        "stderr",
        "analytic",
        "abs_delta",
    ]
    rows = []
    for index, (_, v1, _, cfg_i) in enumerate(_sweep_points(cfg)):
        net = cfg_i.network()
        policies = cfg_i.policies()
        batch = _per_point_batch(cfg_i, index)
        for scheme in _SCHEMES:
            pol = policies[scheme]
            ana = analytics.scheme_metrics(
                net, pol, scheme, cfg_i.eve_model, approx=cfg_i.approx,
                delta=cfg_i.content.delta,
            )
            est_pc, se_pc = montecarlo.estimate_pc(
                net, pol, scheme, batch, delta=cfg_i.content.delta
            )
            est_ps, se_ps = montecarlo.estimate_ps(net, pol, scheme, cfg_i.eve_model, batch)
            for metric, est, se, ref in (
                ("p_c", est_pc, se_pc, ana.p_c),
                ("p_s", est_ps, se_ps, ana.p_s),
            ):
                rows.append(
                    {
                        "sweep_var": v1,
                        "scheme": scheme,
                        "eve_model": cfg_i.eve_model,
                        "metric": metric,
                        "estimate": est,
                        "stderr": se,
                        "analytic": ref,
                        "abs_delta": abs(est - ref),
                    }
                )
        if cfg_i.eve_model == "NCE":
            est, se = montecarlo.estimate_scdp_overall(
                net, cfg_i.content, policies, "NCE", batch
            )
            triple = ScdpTriple(
                *(
                    analytics.scheme_metrics(
                        net, policies[s], s, "NCE", approx=cfg_i.approx,
                        delta=cfg_i.content.delta,
                    ).scdp
                    for s in _SCHEMES
                )
            )
            ref = scdp_overall(triple, cfg_i.content, net.k, "exact")
            rows.append(
                {
                    "sweep_var": v1,
                    "scheme": "ALL",
                    "eve_model": "NCE",
                    "metric": "scdp_overall",
                    "estimate": est,
                    "stderr": se,
                    "analytic": ref,
                    "abs_delta": abs(est - ref),
                }
            )
    return columns, rows


def cmd_optimize_rates(cfg: ExperimentConfig):
    columns = [
        "sweep_var",
        "scheme",
        "sbs",
        "beta_e",
        "r_e",
        "scdp",
        "objective",
        "iterations",
        "converged",
        "kkt_residual",
    ]
    rows = []
    all_converged = True
    for _, v1, _, cfg_i in _sweep_points(cfg):
        net = cfg_i.network()
        jt_problem = make_jt_problem(net, cfg_i.rates.r_s)
        jt = solve_jt_rate(jt_problem)
        cm = solve_cm_rate(jt_problem, cfg_i.content.delta)
        ot_problem = make_ot_problem(net, cfg_i.rates.r_s)
        ot = ao_solve_ot_rates(ot_problem)
        uniform = solve_ot_uniform_rate(ot_problem)
        all_converged &= ot.converged

        def row(scheme, sbs, beta_e, scdp, objective, iters="", conv="", kkt=""):
            rows.append(
                {
                    "sweep_var": v1,
                    "scheme": scheme,
                    "sbs": sbs,
                    "beta_e": beta_e,
                    "r_e": analytics.rate_from_beta(beta_e),
                    "scdp": scdp,
                    "objective": objective,
                    "iterations": iters,
                    "converged": conv,
                    "kkt_residual": kkt,
                }
            )

        row("JT", "", jt.beta_e, jt.scdp, jt.objective)
        for k, bk in enumerate(ot.beta_e):
            row(
                "OT",
                k + 1,
                float(bk),
                ot_scdp_at(ot_problem, ot.beta_e),
                ot.omega,
                ot.iterations,
                ot.converged,
                ot.kkt_residual,
            )
        row("OT_UNIFORM", "", uniform.beta_e, uniform.scdp, uniform.objective)
        row("CM", "", cm.beta_e, cm.scdp, cm.objective)
    return columns, rows, all_converged


def cmd_optimize_phi(cfg: ExperimentConfig):
    columns = [
        "sweep_var",
        "p_jt",
        "p_ot",
        "p_cm",
        "phi_star",
        "phi_grid",
        "phi_grid_gap",
        "scdp_hybrid",
        "scdp_hybrid_exact",
        "best_split",
        "scdp_best_split",
        "scdp_mpf_only",
        "scdp_dsf_only",
        "scdp_no_cache",
    ]
    rows = []
    all_converged = True
    for _, v1, _, cfg_i in _sweep_points(cfg):
        report = end_to_end_design(
            cfg_i.network(), cfg_i.content, cfg_i.rates.r_s, eve_model="NCE"
        )
        all_converged &= report.ot.converged
        rows.append(
            {
                "sweep_var": v1,
                "p_jt": report.triple.p_jt,
                "p_ot": report.triple.p_ot,
                "p_cm": report.triple.p_cm,
                "phi_star": report.phi_star,
                "phi_grid": report.phi_grid,
                "phi_grid_gap": report.phi_grid_gap,
                "scdp_hybrid": report.scdp_at_phi_star,
                "scdp_hybrid_exact": report.scdp_exact_at_phi_star,
                "best_split": report.best_split,
                "scdp_best_split": report.scdp_best_split,
                "scdp_mpf_only": report.scdp_mpf_only,
                "scdp_dsf_only": report.scdp_dsf_only,
                "scdp_no_cache": report.scdp_no_cache,
            }
        )
    return columns, rows, all_converged


def _run_command(command: str, cfg: ExperimentConfig, out, fmt) -> int:
    status = EXIT_OK
    if command == "sweep":
        if cfg.sweep is None:
            raise ConfigError("sweep command needs a [sweep] section")
        command = cfg.sweep.task
        if command not in ("analyze", "simulate", "optimize-rates", "optimize-phi"):
            raise ConfigError(f"[sweep] unknown task {command!r}")
    if command == "analyze":
        columns, rows = cmd_analyze(cfg)
    elif command == "simulate":
        columns, rows = cmd_simulate(cfg)
    elif command == "optimize-rates":
        columns, rows, converged = cmd_optimize_rates(cfg)
        status = EXIT_OK if converged else EXIT_NUMERIC
    elif command == "optimize-phi":
        columns, rows, converged = cmd_optimize_phi(cfg)
        status = EXIT_OK if converged else EXIT_NUMERIC
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown command {command!r}")
    _write(columns, rows, _meta(cfg, command), out, fmt)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scdp",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"scdp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("analyze", "analytic curves per scheme (CSV: sweep_var,scheme,eve_model,p_c,p_s,scdp)"),
        ("simulate", "Monte Carlo vs analytic (CSV: ...,metric,estimate,stderr,analytic,abs_delta)"),
        ("optimize-rates", "per-scheme optimal redundant rates"),
        ("optimize-phi", "rate optimization plus optimal caching split"),
        ("sweep", "generic driver running the [sweep] task"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="experiment config path")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=None, help="override simulation seed")
        p.add_argument(
            "--format", choices=("csv", "json-lines"), default="csv", help="output format"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, simulation=replace(cfg.simulation, seed=args.seed))
        return _run_command(args.command, cfg, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
