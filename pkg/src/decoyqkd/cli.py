"""Command-line front end.

Subcommands:

    distribution   photon-number statistics of a configured source (and
                   source parameters inferred from raw rates, if given)
    curve          key rate vs total loss for a list of schemes (CSV)
    session        full three-intensity session analysis (JSON report)
    infer          source parameters from measured counting rates

Every run with ``--out`` leaves a ``<out>.manifest.json`` sidecar
recording the tool version, config hash, seed and output paths. Exit
codes: 0 success, 2 configuration error, 3 measurement inconsistency.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import config as cfgmod
from .decoy import FluctuationPolicy
from .errors import (
    ConfigError,
    DegenerateDistributionError,
    InconsistentDataError,
    InvalidParameterError,
    UndefinedStatisticError,
)
from .session import Scheme, run_pipeline, sample_counts, scan_loss
from .sources import (
    HspsParams,
    HspsSource,
    g2_zero,
    hsps_distribution,
    infer_accidental_rate,
    infer_correlation,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONSISTENT = 3


def _write_output(text: str, out: str | None, extra_outputs: list[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")
        extra_outputs.append(out)


def _write_manifest(
    out: str | None, doc: dict, seed: int | None, outputs: list[str]
) -> None:
    if out is None:
        return
    manifest = {
        "tool_version": cfgmod.TOOL_VERSION,
        "config_sha256": cfgmod.config_sha256(doc),
        "seed": seed,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    path = f"{out}.manifest.json"
    Path(path).write_text(
        cfgmod.dump_json(manifest) + "\n", encoding="utf-8", newline=""
    )


def _distribution_report(dist) -> dict:
    try:
        g2: float | None = g2_zero(dist)
    except UndefinedStatisticError:
        g2 = None
    return {
        "n_max": dist.n_max,
        "tail_folded": dist.tail_folded,
        "p0": dist.p(0),
        "p1": dist.p(1),
        "p_multi": dist.p_at_least(2),
        "g2_zero": g2,
        "probs": list(dist.probs),
    }


def _infer_block(rates, d_i: float) -> dict:
    r_s = infer_accidental_rate(rates)
    mu_acc = r_s * rates.gate_time_s
    p_cor = infer_correlation(rates, r_s)
    return {
        "r_s_hz": r_s,
        "mu_acc": mu_acc,
        "p_cor": p_cor,
        "d_i": d_i,
    }


def cmd_distribution(args: argparse.Namespace) -> int:
    doc = cfgmod.load_config(args.config)
    report: dict = {"report": "distribution", "tool_version": cfgmod.TOOL_VERSION}

    source_block = cfgmod.section(doc, "source", required=False)
    rates_block = cfgmod.section(doc, "rates", required=False)
    have_source = "kind" in source_block
    if not have_source and not rates_block:
        raise ConfigError(
            "distribution needs a 'source' model or a 'rates' block"
        )

    n_max = cfgmod.integer_field(source_block, "n_max", "source", default=16)
    if have_source:
        model = cfgmod.source_from_dict(source_block, "source")
        report["source"] = cfgmod.source_to_dict(model)
        report["distribution"] = _distribution_report(model.distribution(n_max))
    if rates_block:
        rates = cfgmod.rates_from_dict(rates_block)
        d_i = cfgmod.number_field(rates_block, "d_i", "rates", default=1e-3)
        inference = _infer_block(rates, d_i)
        report["inference"] = inference
        if not have_source:
            params = HspsParams(
                p_cor=inference["p_cor"], mu_acc=inference["mu_acc"], d_i=d_i
            )
            report["source"] = cfgmod.source_to_dict(HspsSource(params))
            report["distribution"] = _distribution_report(
                hsps_distribution(params, n_max)
            )

    outputs: list[str] = []
    _write_output(cfgmod.dump_json(report) + "\n", args.out, outputs)
    _write_manifest(args.out, doc, None, outputs)
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    doc = cfgmod.load_config(args.config)
    rates_block = cfgmod.section(doc, "rates")
    rates = cfgmod.rates_from_dict(rates_block)
    report = {
        "report": "infer",
        "tool_version": cfgmod.TOOL_VERSION,
        **_infer_block(
            rates, cfgmod.number_field(rates_block, "d_i", "rates", default=1e-3)
        ),
    }
    outputs: list[str] = []
    _write_output(cfgmod.dump_json(report) + "\n", args.out, outputs)
    _write_manifest(args.out, doc, None, outputs)
    return EXIT_OK


def _counts_block(counts) -> dict:
    return {
        name: {
            "gates": c.gates,
            "detections": c.detections,
            "errors": c.errors,
        }
        for name, c in (
            ("signal", counts.signal),
            ("decoy", counts.decoy),
            ("vacuum", counts.vacuum),
        )
    }


def cmd_session(args: argparse.Namespace) -> int:
    doc = cfgmod.load_config(args.config)
    cfg, mode = cfgmod.experiment_from_dict(doc)
    if args.sigma is not None:
        cfg = replace(cfg, fluctuation=FluctuationPolicy(n_sigma=args.sigma))
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)

    counts = sample_counts(cfg) if mode == "sampled" else None
    result = run_pipeline(cfg, counts)

    obs = result.observation
    fb = result.observable_bounds
    report = {
        "report": "session",
        "tool_version": cfgmod.TOOL_VERSION,
        "mode": result.mode,
        "seed": cfg.rng_seed if mode == "sampled" else None,
        "config": cfgmod.experiment_to_dict(cfg, mode),
        "observation": {
            "q_signal": obs.q_signal,
            "q_decoy": obs.q_decoy,
            "e_signal": obs.e_signal,
            "e_decoy": obs.e_decoy,
            "y0_obs": obs.y0_obs,
            "n_signal": obs.n_signal,
            "n_decoy": obs.n_decoy,
            "n_vacuum": obs.n_vacuum,
        },
        "expected": {
            "q_signal": result.expected.q_signal,
            "e_signal": result.expected.e_signal,
            "q_decoy": result.expected.q_decoy,
            "e_decoy": result.expected.e_decoy,
            "q_vacuum": result.expected.q_vacuum,
            "e_vacuum": result.expected.e_vacuum,
        },
        "condition_ok": result.condition_ok,
        "observable_bounds": {
            "q_decoy_low": fb.q_decoy_low,
            "q_signal_high": fb.q_signal_high,
            "eq_signal_high": fb.eq_signal_high,
            "y0_low": fb.y0_low,
            "y0_high": fb.y0_high,
            "clamped": list(fb.clamped),
        },
        "bounds": {
            "y1_lower": result.bounds.y1_lower,
            "e1_upper": result.bounds.e1_upper,
            "g0": result.bounds.g0,
            "g1_lower": result.bounds.g1_lower,
            "flags": list(result.bounds.flags),
        },
        "truth": {"y1": result.y1_true, "e1": result.e1_true},
        "key_rate": {
            "rate_per_pulse": result.key.rate_per_pulse,
            "secure_bits": result.key.secure_bits,
            "negative": result.key.negative,
            "components": {
                "ec_cost": result.key.components.ec_cost,
                "g0": result.key.components.g0,
                "g1_term": result.key.components.g1_term,
                "raw_rate": result.key.components.raw_rate,
            },
        },
    }
    if counts is not None:
        report["counts"] = _counts_block(counts)

    outputs: list[str] = []
    _write_output(cfgmod.dump_json(report) + "\n", args.out, outputs)
    _write_manifest(
        args.out, doc, cfg.rng_seed if mode == "sampled" else None, outputs
    )
    return EXIT_OK


def cmd_curve(args: argparse.Namespace) -> int:
    doc = cfgmod.load_config(args.config)
    cfg, _ = cfgmod.experiment_from_dict(doc)

    schemes = [Scheme.parse(tok) for tok in args.schemes.split(",") if tok.strip()]
    if not schemes:
        raise ConfigError("no schemes given")

    if args.loss_step <= 0.0:
        raise ConfigError(f"--loss-step must be > 0, got {args.loss_step}")
    if args.loss_to < args.loss_from:
        raise ConfigError("--loss-to must be >= --loss-from")
    grid = []
    loss = args.loss_from
    while loss <= args.loss_to + 1e-9:
        grid.append(round(loss, 12))
        loss += args.loss_step
    if not grid:
        raise ConfigError("empty loss grid")

    curves = [scan_loss(cfg, scheme, grid) for scheme in schemes]

    lines = ["loss_db," + ",".join(c.scheme_label for c in curves)]
    for i, loss_db in enumerate(grid):
        row = [cfgmod.format_float(loss_db)]
        row.extend(cfgmod.format_float(c.rate[i]) for c in curves)
        lines.append(",".join(row))
    for c in curves:
        cutoff = "none" if c.cutoff_db is None else cfgmod.format_float(c.cutoff_db)
        lines.append(f"# cutoff_db,{c.scheme_label},{cutoff}")
    text = "\n".join(lines) + "\n"

    outputs: list[str] = []
    _write_output(text, args.out, outputs)
    _write_manifest(args.out, doc, None, outputs)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decoyqkd",
        description=(
            "Decoy-state QKD analysis with heralded and coherent-state "
            "sources: photon statistics, session security bounds and "
            "loss-sweep scheme comparisons."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", help="output file (default: stdout)")

    p_dist = sub.add_parser(
        "distribution", help="photon-number statistics of a source"
    )
    common(p_dist)
    p_dist.set_defaults(func=cmd_distribution)

    p_infer = sub.add_parser(
        "infer", help="source parameters from measured counting rates"
    )
    common(p_infer)
    p_infer.set_defaults(func=cmd_infer)

    p_sess = sub.add_parser("session", help="full session analysis report")
    common(p_sess)
    p_sess.add_argument("--seed", type=int, help="override run.rng_seed")
    p_sess.add_argument(
        "--sigma", type=float, help="override run.n_sigma (fluctuation width)"
    )
    p_sess.set_defaults(func=cmd_session)

    p_curve = sub.add_parser("curve", help="key rate vs total loss (CSV)")
    common(p_curve)
    p_curve.add_argument(
        "--schemes",
        required=True,
        help=(
            "comma-separated scheme list: wcs-no-decoy[:mu], hsps-no-decoy, "
            "wcs-decoy-opt, hsps-decoy:<p_cor>, ideal-sps"
        ),
    )
    p_curve.add_argument("--loss-from", type=float, required=True, help="dB")
    p_curve.add_argument("--loss-to", type=float, required=True, help="dB")
    p_curve.add_argument("--loss-step", type=float, required=True, help="dB")
    p_curve.set_defaults(func=cmd_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InconsistentDataError as exc:
        print(f"data inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (
        ConfigError,
        InvalidParameterError,
        DegenerateDistributionError,
        UndefinedStatisticError,
    ) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
