"""The `hardcore` command line: one entry point wiring all modules.

Outputs are deterministic machine-readable artifacts: JSON (sorted keys)
or CSV with the resolved config embedded, so identical config + seed +
version reproduces files byte for byte.  Exit codes: 0 ok, 1 a check
failed, 2 usage/config error, 3 an enumeration/matrix cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields, replace
from fractions import Fraction

import mpmath as mp

from . import __version__
from .bounds import (
    check_alpha_log_alpha,
    check_binomial_sum_asymptotic,
    check_calculus_form,
    check_entropy_sandwich,
    check_m2_absorption,
    chernoff_binomial_sum_bound,
    condition_check,
    corollary_hypercube_regimes,
    theorem1_lower_bound,
    theorem2_exponent_pipeline,
    trivial_region_bound_chain,
)
from .config import (
    ExperimentConfig,
    config_to_text,
    load_config,
    parse_seed_range,
)
from .containers import (
    FamilyKey,
    covering_approximation,
    degree_algorithm,
    enumerate_family,
    theorem2_bound_check,
    verify_psi_approximation,
)
from .errors import (
    CapExceededError,
    ConfigError,
    HardcoreError,
    InvalidParameterError,
    PreconditionError,
)
from .graphs import (
    bipartite_expansion_constant,
    export_graph_text,
    parse_graph_spec,
)
from .hardcore import (
    HardCoreModel,
    RegionTag,
    alpha_threshold_fraction,
    enumerate_independent_sets,
)
from .glauber import (
    bottleneck_conductance_bound,
    build_chain_analysis,
    chain_conductance_exact,
    escape_time_experiment,
    mixing_curve,
    mixing_time_exact,
    spectral_gap,
)
from .kernels import BACKEND, set_threads
from .numerics import format_fraction
from .rng import GENERATOR_VERSION

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def _jnum(x):
    """Tag every numeric with its arithmetic mode."""
    if isinstance(x, Fraction):
        return {"mode": "exact-rational", "value": format_fraction(x), "float": float(x)}
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return {"mode": "exact-int", "value": str(x)}
    if isinstance(x, mp.mpf):
        return {"mode": "float128", "value": mp.nstr(x, 30)}
    return {"mode": "float64", "value": float(x)}


def _sanitize(obj):
    """Replace non-finite floats by strings so artifacts stay strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return repr(obj)
    return obj


def _artifact(cfg: ExperimentConfig, results) -> str:
    doc = {
        "config": cfg.resolved(),
        "generator": GENERATOR_VERSION,
        "kernel_backend": BACKEND,
        "package_version": __version__,
        "results": _sanitize(results),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_artifact(cfg: ExperimentConfig, header: str, rows: list[str]) -> str:
    meta = json.dumps(
        {
            "config": cfg.resolved(),
            "generator": GENERATOR_VERSION,
            "kernel_backend": BACKEND,
            "package_version": __version__,
        },
        sort_keys=True,
    )
    return "\n".join([f"# {meta}", header, *rows]) + "\n"


def _model(cfg: ExperimentConfig) -> HardCoreModel:
    g = parse_graph_spec(cfg.graph)
    lam = cfg.lam if cfg.precision in ("rational", "float128") else float(cfg.lam)
    return HardCoreModel(g, lam)


# -- subcommands ----------------------------------------------------------------


def cmd_enumerate(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    summary = enumerate_independent_sets(
        m.graph,
        lam=m.lam,
        by_family=cfg.by_family,
        cap=cfg.enumeration_cap,
    )
    results = {
        "graph": m.graph.name,
        "count": str(summary.count),
        "partition_function": _jnum(summary.partition_function),
        "alpha_m": _jnum(summary.alpha_m),
        "regions": {
            tag.value: _jnum(w) for tag, w in sorted(
                summary.region_weights.items(), key=lambda kv: kv[0].value
            )
        },
    }
    if summary.family_weights is not None:
        results["families"] = {
            f"a={a},g={g}": _jnum(w)
            for (a, g), w in sorted(summary.family_weights.items())
        }
    _emit(cfg, _artifact(cfg, results))
    return EXIT_OK


def cmd_analyze(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    if cfg.exact and not m.exact:
        raise ConfigError("--exact requires rational precision")
    analysis = build_chain_analysis(m, cap=cfg.matrix_cap)
    results: dict = {
        "graph": m.graph.name,
        "states": analysis.size,
        "pi": [_jnum(p) for p in analysis.pi] if analysis.size <= 4096 else None,
    }
    bb = bottleneck_conductance_bound(m, cap=cfg.matrix_cap)
    results["bottleneck"] = {
        "side": bb.side,
        "phi_phase": _jnum(bb.phi_phase),
        "ratio_balanced_phase": _jnum(bb.ratio_balanced_phase),
        "ratio_balanced_power": _jnum(bb.ratio_balanced_power),
        "holds_phase_le_ratio": bb.holds_12,
        "holds_ratio_le_power": bb.holds_23,
    }
    scan_ok = analysis.size <= (cfg.exact_scan_cap if m.exact else cfg.scan_cap)
    if scan_ok:
        phi, cut = chain_conductance_exact(
            analysis, scan_cap=cfg.scan_cap, exact_cap=cfg.exact_scan_cap
        )
        results["conductance"] = {"phi": _jnum(phi), "argmin_states": cut}
        results["bound_chain_holds"] = bool(
            phi <= bb.phi_phase or abs(float(phi) - float(bb.phi_phase)) < 1e-12
        )
    tau = mixing_time_exact(analysis, budget=cfg.mixing_budget, threshold=cfg.tv_threshold)
    results["mixing_time"] = tau
    gap = spectral_gap(analysis)
    results["spectral_gap"] = _jnum(gap) if gap is not None else None
    _emit(cfg, _artifact(cfg, results))
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    if cfg.stop_region != "balanced":
        raise ConfigError(f"unsupported stop region {cfg.stop_region!r}")
    summary = escape_time_experiment(
        m, cfg.seeds, cfg.max_steps, base_seed=cfg.base_seed, start=cfg.start
    )
    rows = [
        f"{seed},{t if t >= 0 else ''},{1 if t < 0 else 0}"
        for seed, t in zip(summary.seeds, summary.hit_times)
    ]
    _emit(cfg, _csv_artifact(cfg, "seed,hit_time,censored", rows))
    return EXIT_OK


def cmd_containers_verify(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    g = m.graph
    psi = cfg.psi
    reports = []
    failures = 0
    masks = range(1, 1 << g.half_size) if cfg.all_a else None
    seen_closures: set[int] = set()
    candidates = []
    for mask in masks if masks is not None else range(1, 1 << g.half_size):
        A = g.set_from_class_mask("even", mask)
        if masks is None:
            from .graphs import closure as _closure

            cb = _closure(g, A).bits
            if cb in seen_closures:
                continue
            seen_closures.add(cb)
        candidates.append(A)
    for A in candidates:
        f0 = covering_approximation(g, A)
        pa, trace = degree_algorithm(g, f0, A, psi)
        rep = verify_psi_approximation(g, pa, A)
        if not rep.all_ok:
            failures += 1
        reports.append(
            {
                "A": sorted(A),
                "F0": sorted(f0.f0),
                "F": sorted(pa.f),
                "S": sorted(pa.s),
                "iterations": list(trace.iterations),
                "conditions": {
                    "f_in_neighborhood": rep.f_in_neighborhood,
                    "s_covers_closure": rep.s_covers_closure,
                    "s_degrees_ok": rep.s_degrees_ok,
                    "outside_degrees_ok": rep.outside_degrees_ok,
                    "size_bound_ok": rep.size_bound_ok,
                },
                "witnesses": {k: str(v) for k, v in rep.witnesses.items()},
            }
        )
    _emit(
        cfg,
        _artifact(
            cfg,
            {
                "graph": g.name,
                "psi": psi,
                "subjects": len(reports),
                "failures": failures,
                "reports": reports,
            },
        ),
    )
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def cmd_containers_fit_c(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    g = m.graph
    delta = bipartite_expansion_constant(g, scan_cap=cfg.family_cap)
    if delta is None:
        raise PreconditionError(
            "graph has no nonempty small sets; the family bound does not apply"
        )
    from .graphs import side_scan

    hist, *_ = side_scan(g, "even")
    fits = {}
    for a in range(hist.shape[1]):
        for gg in range(hist.shape[2]):
            if int(hist[:, a, gg].sum()) == 0:
                continue
            rep = theorem2_bound_check(
                g, FamilyKey(a, gg), m.lam, delta=delta, cap=cfg.family_cap
            )
            fits[f"a={a},g={gg}"] = {
                "weight": _jnum(rep.weight),
                "t": gg - a,
                "c_max": rep.c_max,
            }
    _emit(
        cfg,
        _artifact(
            cfg,
            {"graph": g.name, "delta": _jnum(delta), "fits": fits},
        ),
    )
    return EXIT_OK


def _report_dict(r) -> dict:
    d = asdict(r)
    d["params"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in r.params.items()}
    return d


def cmd_bounds_check(cfg: ExperimentConfig, args) -> int:
    ineq = args.inequality
    grid = args.grid
    reports = []

    def gridvals(default):
        if not grid:
            return default
        return [Fraction(tok) if "/" in tok else float(tok) for tok in grid.split(",")]

    if ineq == "entropy-sandwich":
        for x in gridvals([10**-k for k in range(1, 7)] + [0.2, 0.3, 0.35]):
            lo, hi = check_entropy_sandwich(float(x))
            reports.extend([lo, hi])
    elif ineq == "binomial-chernoff":
        for n in gridvals(list(range(1, 65))):
            for c in (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10), Fraction(5, 10)):
                reports.append(chernoff_binomial_sum_bound(int(n), c))
    elif ineq == "alpha-log-alpha":
        for k in gridvals(list(range(-10, 21))):
            orig, calc = check_alpha_log_alpha(float(2.0 ** float(k)))
            reports.extend([orig, calc])
    elif ineq == "alpha-log-alpha-calculus":
        for gam in gridvals([k / 100 for k in range(1, 100)]):
            reports.append(check_calculus_form(float(gam)))
    elif ineq == "triv-chain":
        for mval in gridvals([10**3, 10**4, 10**5]):
            reports.extend(trivial_region_bound_chain(int(mval), args.lam, args.d))
    elif ineq in ("condition-main", "condition-strong", "condition-codegree"):
        variant = ineq.split("-", 1)[1]
        for lamv in gridvals([2.0**k for k in range(-5, 11)]):
            reports.append(
                condition_check(float(lamv), args.d, args.delta, cfg.c, variant)
            )
    elif ineq == "binomial-asymptotic":
        for n in gridvals([100, 1000, 10000]):
            for k in (0, 1, int(n) // 100, int(n) // 10):
                reports.append(check_binomial_sum_asymptotic(int(n), k))
    elif ineq == "m2-absorption":
        for mval in gridvals([10**4, 10**5, 10**6]):
            reports.append(check_m2_absorption(int(mval), args.d, cfg.c))
    elif ineq == "theorem2-exponent":
        for lamv in gridvals([2.0**k for k in range(0, 11)]):
            reports.append(
                theorem2_exponent_pipeline(
                    float(lamv), args.d, args.delta, args.g, args.t, condition_c=cfg.c
                )
            )
    else:
        raise ConfigError(f"unknown inequality id {ineq!r}")

    failed = sum(1 for r in reports if not r.passed and not r.vacuous)
    _emit(
        cfg,
        _artifact(
            cfg,
            {
                "inequality": ineq,
                "reports": [_report_dict(r) for r in reports],
                "failed": failed,
            },
        ),
    )
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def cmd_bounds_theorem1(cfg: ExperimentConfig, args) -> int:
    delta = args.delta
    try:
        bound, exponent = theorem1_lower_bound(
            args.N, float(cfg.lam), args.d, delta, c=cfg.c, c_exp=cfg.c_exp
        )
    except PreconditionError as exc:
        _emit(cfg, _artifact(cfg, {"applicable": False, "reason": str(exc)}))
        return EXIT_CHECK_FAILED
    _emit(
        cfg,
        _artifact(
            cfg,
            {
                "applicable": True,
                "exponent": exponent,
                "bound": mp.nstr(bound, 20),
            },
        ),
    )
    return EXIT_OK


def cmd_bounds_regimes(cfg: ExperimentConfig, args) -> int:
    res = corollary_hypercube_regimes(
        args.d,
        float(cfg.lam),
        threshold_c=cfg.regime_threshold_c,
        small_limit=cfg.regime_small_limit,
        large_coeff=cfg.regime_large_coeff,
    )
    _emit(
        cfg,
        _artifact(
            cfg,
            {
                "applicable": res.applicable,
                "regime": res.regime,
                "log2_bound": res.log2_bound,
                "reason": res.reason,
            },
        ),
    )
    return EXIT_OK


def cmd_graph_info(cfg: ExperimentConfig) -> int:
    g = parse_graph_spec(cfg.graph)
    results: dict = {
        "name": g.name,
        "N": g.num_vertices,
        "M": g.half_size,
        "degree": g.degree,
        "even_class": list(g.even_class) if g.num_vertices <= 256 else None,
    }
    try:
        delta = bipartite_expansion_constant(g)
        results["delta"] = _jnum(delta) if delta is not None else "no-small-nonempty-sets"
    except CapExceededError as exc:
        results["delta"] = f"not-computed: {exc}"
    _emit(cfg, _artifact(cfg, results))
    return EXIT_OK


def cmd_graph_export(cfg: ExperimentConfig) -> int:
    g = parse_graph_spec(cfg.graph)
    _emit(cfg, export_graph_text(g))
    return EXIT_OK


def cmd_mixing_curve(cfg: ExperimentConfig) -> int:
    m = _model(cfg)
    analysis = build_chain_analysis(m, cap=cfg.matrix_cap)
    curve = mixing_curve(analysis, budget=cfg.mixing_budget, threshold=cfg.tv_threshold)
    rows = [f"{t},{tv!r}" for t, tv in curve]
    _emit(cfg, _csv_artifact(cfg, "t,worst_start_tv", rows))
    return EXIT_OK


def cmd_config_template(cfg: ExperimentConfig) -> int:
    _emit(cfg, config_to_text(cfg))
    return EXIT_OK


# -- wiring -----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file; flags override its values")
    p.add_argument("--graph", help="hypercube:d=K | torus:L=K,d=K | file:PATH")
    p.add_argument("--lambda", dest="lam", help="activity as a rational, e.g. 3/2")
    p.add_argument("--precision", choices=["rational", "float64", "float128"])
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", dest="base_seed", type=int, help="base seed for stream derivation")
    p.add_argument("--out", help="output path (stdout when omitted)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hardcore",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="exact region weights and Z")
    _add_common(p)
    p.add_argument("--by-family", action="store_true")

    p = sub.add_parser("analyze", help="exact chain analysis: pi, conductance, tau, gap")
    _add_common(p)
    p.add_argument("--exact", action="store_true", help="require rational arithmetic")
    p.add_argument("--tv-threshold", choices=["1/e", "1/4"])

    p = sub.add_parser("simulate", help="escape-time experiment to CSV")
    _add_common(p)
    p.add_argument("--start", choices=["even-full", "odd-full", "empty"])
    p.add_argument("--stop-region", choices=["balanced"])
    p.add_argument("--seeds", help="range a..b or comma list")
    p.add_argument("--max-steps", type=lambda s: int(float(s)))

    p = sub.add_parser("containers", help="approximation machinery")
    csub = p.add_subparsers(dest="subcommand", required=True)
    pv = csub.add_parser("verify", help="run + verify the degree algorithm")
    _add_common(pv)
    pv.add_argument("--psi", type=int)
    pv.add_argument("--all-a", action="store_true", help="every nonempty A, not one per closure class")
    pf = csub.add_parser("fit-c", help="largest family-bound constant per (a,g)")
    _add_common(pf)

    p = sub.add_parser("bounds", help="scalar inequality suite")
    bsub = p.add_subparsers(dest="subcommand", required=True)
    pc = bsub.add_parser("check", help="evaluate one inequality over a grid")
    _add_common(pc)
    pc.add_argument("--inequality", required=True)
    pc.add_argument("--grid", help="comma-separated primary-parameter values")
    pc.add_argument("--d", type=int, default=64)
    pc.add_argument("--delta", type=float, default=0.5)
    pc.add_argument("--g", type=int, default=10**6)
    pc.add_argument("--t", type=int, default=10**4)
    pt = bsub.add_parser("theorem1", help="the assembled mixing-time lower bound")
    _add_common(pt)
    pt.add_argument("--N", type=int, required=True)
    pt.add_argument("--d", type=int, required=True)
    pt.add_argument("--delta", type=float, required=True)
    pt.add_argument("--c", dest="cflag", type=float)
    pt.add_argument("--c-exp", dest="c_exp_flag", type=float)
    pr = bsub.add_parser("regimes", help="hypercube regime table")
    _add_common(pr)
    pr.add_argument("--d", type=int, required=True)

    p = sub.add_parser("graph", help="graph utilities")
    gsub = p.add_subparsers(dest="subcommand", required=True)
    gi = gsub.add_parser("info")
    _add_common(gi)
    ge = gsub.add_parser("export", help="plain-text format")
    _add_common(ge)

    p = sub.add_parser("mixing-curve", help="CSV of (t, worst-start TV)")
    _add_common(p)
    p.add_argument("--tv-threshold", choices=["1/e", "1/4"])

    p = sub.add_parser("config-template", help="print a full config file")
    _add_common(p)

    return ap


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    overrides = {}
    mapping = {
        "graph": "graph",
        "precision": "precision",
        "threads": "threads",
        "base_seed": "base_seed",
        "out": "out",
        "start": "start",
        "stop_region": "stop_region",
        "max_steps": "max_steps",
        "psi": "psi",
        "all_a": "all_a",
        "by_family": "by_family",
        "exact": "exact",
        "tv_threshold": "tv_threshold",
        "cflag": "c",
        "c_exp_flag": "c_exp",
    }
    for attr, key in mapping.items():
        val = getattr(args, attr, None)
        if val is not None and val is not False:
            overrides[key] = val
    if getattr(args, "lam", None):
        overrides["lam"] = Fraction(args.lam)
    if getattr(args, "seeds", None):
        overrides["seeds"] = parse_seed_range(args.seeds)
    cfg = replace(cfg, **overrides)
    valid_fields = {f.name for f in fields(ExperimentConfig)}
    assert set(overrides) <= valid_fields
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if cfg.threads:
            set_threads(cfg.threads)
        cmd = args.command
        if cmd == "enumerate":
            return cmd_enumerate(cfg)
        if cmd == "analyze":
            return cmd_analyze(cfg)
        if cmd == "simulate":
            return cmd_simulate(cfg)
        if cmd == "containers":
            if args.subcommand == "verify":
                return cmd_containers_verify(cfg)
            return cmd_containers_fit_c(cfg)
        if cmd == "bounds":
            if args.subcommand == "check":
                return cmd_bounds_check(cfg, args)
            if args.subcommand == "theorem1":
                return cmd_bounds_theorem1(cfg, args)
            return cmd_bounds_regimes(cfg, args)
        if cmd == "graph":
            if args.subcommand == "info":
                return cmd_graph_info(cfg)
            return cmd_graph_export(cfg)
        if cmd == "mixing-curve":
            return cmd_mixing_curve(cfg)
        if cmd == "config-template":
            return cmd_config_template(cfg)
        raise ConfigError(f"unknown command {cmd!r}")
    except (ConfigError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except HardcoreError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
