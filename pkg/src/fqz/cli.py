"""Command-line front end: config ingestion, subcommands, report emission.

Subcommands map onto the library modules: ``dim`` (closed-form dimensions and
separation validation), ``diagnose`` (identity / bound / convergence / ball
suites with PASS-FAIL rows), ``quantize`` (coefficient tables, cached by
manifest hash), ``antichain`` (family member dumps) and ``mass`` (evaluate one
cylinder word).  Reports are CSV by default, JSON-lines with ``--format
jsonl``; every report embeds its run manifest, and the quantize cache replays
byte-identical reports for identical manifests.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .symbolic import Antichain, parse_word, random_maximal_antichain
from .systems import (
    CondensationSystem,
    ConfigError,
    dimension_kr,
    load_config,
    u0_l0_d0,
    validate_iosc,
    validate_osc,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "PASS" if v else "FAIL"
    if isinstance(v, float):
        return "%.12g" % v
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config_sha256: str
    flags: dict
    seed: int | None

    def canonical(self) -> str:
        doc = {
            "tool": "fqz",
            "version": __version__,
            "subcommand": self.subcommand,
            "config_sha256": self.config_sha256,
            "flags": self.flags,
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _render_report(manifest: RunManifest, columns: list[str], rows: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        out = [json.dumps({"manifest": json.loads(manifest.canonical())}, sort_keys=True)]
        for r in rows:
            out.append(
                json.dumps({k: (_fmt(r.get(k)) if isinstance(r.get(k), (float, Fraction)) else r.get(k)) for k in columns}, sort_keys=True)
            )
        return "\n".join(out) + "\n"
    lines = [f"# manifest: {manifest.canonical()}"]
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(_fmt(r.get(k, "")) for k in columns))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _plot_target(args, suffix: str) -> Path | None:
    if getattr(args, "no_plot", False):
        return None
    if args.out:
        stem = Path(args.out)
        return stem.with_name(stem.stem + "_" + suffix + ".png")
    if getattr(args, "plot_dir", None):
        return Path(args.plot_dir) / (args.subcommand + "_" + suffix + ".png")
    return None


def _config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="config file path or builtin name (cantor-i, asym-i, cantor-ii)")
    parser.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--plot-dir", help="figure directory when printing to stdout")
    parser.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for per-level parallelism")


# ---------------------------------------------------------------------------
# dim


def cmd_dim(args) -> int:
    cs, text = load_config(args.config)
    manifest = _manifest(args, text)
    u0, l0, d0 = u0_l0_d0(cs)
    ratios = cs.outer_ratios if cs.case == "I" else cs.inner_ratios
    rows = [
        {"quantity": "case", "value": cs.case, "detail": ""},
        {"quantity": "d0", "value": d0, "detail": "order-zero quantization dimension"},
        {"quantity": "u0", "value": u0, "detail": "sum t log t"},
        {"quantity": "l0", "value": l0, "detail": "sum t log ratio"},
        {"quantity": "k0_aux", "value": dimension_kr(cs.t, ratios, 0.0), "detail": "auxiliary measure, order 0"},
        {"quantity": "k1_aux", "value": dimension_kr(cs.t, ratios, 1.0), "detail": "auxiliary measure, order 1"},
    ]
    sim_dim = _similarity_dimension(cs)
    rows.append({"quantity": "similarity_dim_outer", "value": sim_dim, "detail": "solves sum ratio^D = 1"})
    ok = True
    if cs.case == "I":
        rep = validate_osc(cs.outer, cs.outer_witness)
        rows.append({"quantity": "osc", "value": rep["verdict"], "detail": ";".join(f"{c['name']}={c['status']}" for c in rep["checks"])})
        ok = rep["verdict"] in ("pass", "unverifiable")
    else:
        rep = validate_iosc(cs)
        rows.append({"quantity": "iosc", "value": rep["verdict"], "detail": ";".join(f"{c['name']}={c['status']}" for c in rep["checks"])})
        ok = rep["verdict"] in ("pass", "unverifiable")
        rep2 = validate_osc(cs.inner.maps, cs.inner.witness_box)
        rows.append({"quantity": "osc_inner", "value": rep2["verdict"], "detail": ""})
        ok = ok and rep2["verdict"] in ("pass", "unverifiable")
    _emit(_render_report(manifest, ["quantity", "value", "detail"], rows, args.format), args.out)
    target = _plot_target(args, "support")
    if target is not None:
        from .plots import plot_support

        plot_support(cs, target)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _similarity_dimension(cs: CondensationSystem) -> float:
    import math

    ratios = [float(r) for r in cs.outer_ratios]
    lo, hi = 0.0, 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = sum(r**mid for r in ratios)
        if s > 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# diagnose


def cmd_diagnose(args) -> int:
    cs, text = load_config(args.config)
    manifest = _manifest(args, text)
    suite = args.suite
    if suite == "convergence":
        return _suite_convergence(args, cs, manifest)
    if suite == "ball":
        return _suite_ball(args, cs, manifest)
    runner = {"mass": _suite_mass, "antichain": _suite_antichain, "identity": _suite_identity}[suite]
    rows = runner(args, cs)
    ok = all(r["pass"] for r in rows)
    _emit(_render_report(manifest, ["suite", "check", "detail", "slack", "pass"], rows, args.format), args.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _systems_under_test(cs: CondensationSystem, seed: int, count: int):
    from .samples import random_case1_system, random_case2_system

    yield "config", cs
    for k in range(count):
        if cs.case == "I":
            yield f"random{k}", random_case1_system(seed + k)
        else:
            yield f"random{k}", random_case2_system(seed + k)


def _suite_mass(args, cs) -> list[dict]:
    import numpy as np

    from .asymptotics import mass_partition_sum
    from .mass import gamma_sum_mu1, mass_case2, mu1, mu1_direct
    from .symbolic import Word, empty_word

    rows = []
    rng = np.random.default_rng(args.seed)
    for name, system in _systems_under_test(cs, args.seed, 4):
        if system.case == "I":
            for trial in range(5):
                anti = random_maximal_antichain(system.n_outer, rng)
                total = mass_partition_sum(system, anti)
                rows.append(
                    {"suite": "mass", "check": f"{name}_partition{trial}",
                     "detail": f"{len(anti)} members, sum={total}",
                     "slack": float(abs(1 - total)), "pass": total == 1}
                )
            w = Word(tuple(int(rng.integers(1, system.n_outer + 1)) for _ in range(6)), system.n_outer)
            ok = mu1(system, w).exact == mu1_direct(system, w)
            rows.append({"suite": "mass", "check": f"{name}_mu1_recursion", "detail": str(w), "slack": 0.0, "pass": ok})
            closed, checked = gamma_sum_mu1(system, w.truncate(2), 3, verify=True)
            rows.append({"suite": "mass", "check": f"{name}_descendant_sum", "detail": f"value={closed}", "slack": 0.0, "pass": bool(checked)})
        else:
            w = Word((1,), system.n_outer)
            o = Word((1,), system.inner.n)
            v1 = mass_case2(system, w).exact
            v2 = mass_case2(system, w, o).exact
            expect1 = system.p[0]
            expect2 = system.p0 * system.p[0] * system.t[0]
            rows.append({"suite": "mass", "check": f"{name}_map_piece", "detail": f"{v1}", "slack": 0.0, "pass": v1 == expect1})
            rows.append({"suite": "mass", "check": f"{name}_aux_piece", "detail": f"{v2}", "slack": 0.0, "pass": v2 == expect2})
    return rows


def _suite_antichain(args, cs) -> list[dict]:
    from .asymptotics import check_count_bounds, check_count_growth, level_family

    rows = []
    jmax = args.jmax or 8
    for name, system in _systems_under_test(cs, args.seed, 4):
        prev = None
        for j in range(1, jmax + 1):
            fam = level_family(system, j)
            for chk in check_count_bounds(system, fam):
                rows.append(
                    {"suite": "antichain", "check": f"{name}_j{j}_{chk.name}",
                     "detail": chk.detail, "slack": chk.slack, "pass": chk.ok}
                )
            if prev is not None:
                for chk in check_count_growth(system, prev, fam):
                    rows.append(
                        {"suite": "antichain", "check": f"{name}_j{j}_{chk.name}",
                         "detail": chk.detail, "slack": chk.slack, "pass": chk.ok}
                    )
            prev = fam
    return rows


def _suite_identity(args, cs) -> list[dict]:
    import numpy as np

    from .asymptotics import antichain_log_identity
    from .mass import hereditary_log_sum, hereditary_log_sum_enumerated, log_symbol_table
    from .symbolic import Word

    rows = []
    rng = np.random.default_rng(args.seed)
    for name, system in _systems_under_test(cs, args.seed, 6):
        if system.case == "I":
            table = log_symbol_table(system)
            for trial in range(3):
                k = int(rng.integers(0, 4))
                sigma = Word(tuple(int(rng.integers(1, system.n_outer + 1)) for _ in range(k)), system.n_outer)
                h = int(rng.integers(1, 5))
                for kind in ("t", "s"):
                    closed = hereditary_log_sum(system, sigma, h, kind)
                    brute = hereditary_log_sum_enumerated(system, sigma, h, kind)
                    exact_ok = closed == brute
                    dev = abs(closed.value(table) - brute.value(table))
                    rows.append(
                        {"suite": "identity", "check": f"{name}_hereditary_{kind}_{trial}",
                         "detail": f"|sigma|={k} h={h}", "slack": dev, "pass": exact_ok and dev < 1e-10}
                    )
        # the weighted antichain log identity applies to any weight pair
        t = system.t
        c = system.inner_ratios if system.case == "II" else system.outer_ratios
        for trial in range(5):
            gamma = random_maximal_antichain(len(t), rng)
            lhs, rhs, exact = antichain_log_identity(t, c, gamma)
            rows.append(
                {"suite": "identity", "check": f"{name}_log_identity_{trial}",
                 "detail": f"lhs={lhs:.10g}", "slack": abs(lhs - rhs), "pass": exact and abs(lhs - rhs) < 1e-10}
            )
    return rows


def _suite_convergence(args, cs, manifest) -> int:
    from .asymptotics import convergence_report

    jmax = args.jmax or (12 if cs.case == "I" else 10)
    rows_obj = convergence_report(cs, jmax)
    rows = [
        {"kind": r.kind, "j": r.j, "count": r.count, "minDepth": r.min_depth,
         "maxDepth": r.max_depth, "value": r.value, "deviation": r.deviation,
         "scaledDeviation": r.scaled_deviation, "pass": r.passed}
        for r in rows_obj
    ]
    cols = ["kind", "j", "count", "minDepth", "maxDepth", "value", "deviation", "scaledDeviation", "pass"]
    _emit(_render_report(manifest, cols, rows, args.format), args.out)
    target = _plot_target(args, "convergence")
    if target is not None:
        from .plots import plot_convergence

        plot_convergence(rows_obj, u0_l0_d0(cs)[2], target)
    return EXIT_OK if all(r.passed for r in rows_obj) else EXIT_CHECK_FAILED


def _suite_ball(args, cs, manifest) -> int:
    from .mass import ball_mass_exponent, fitted_lambda1

    eta1, d3, d4 = ball_mass_exponent(cs)
    lam, _, table = fitted_lambda1(cs)
    rows = [
        {"suite": "ball", "check": "exponent", "detail": f"eta1={eta1:.12g} delta3={d3:.6g} delta4={d4:.6g}", "slack": 0.0, "pass": True},
        {"suite": "ball", "check": "fitted_lambda", "detail": f"lambda1={lam:.6g}", "slack": 0.0, "pass": lam < float("inf")},
    ]
    ok = True
    for eps, sup in table:
        bound = lam * eps**eta1
        good = sup <= bound * (1 + 1e-12)
        ok = ok and good
        rows.append(
            {"suite": "ball", "check": f"sup_eps_{eps:g}", "detail": f"sup={sup:.6g} bound={bound:.6g}",
             "slack": bound - sup, "pass": good}
        )
    _emit(_render_report(manifest, ["suite", "check", "detail", "slack", "pass"], rows, args.format), args.out)
    target = _plot_target(args, "ball")
    if target is not None:
        from .plots import plot_ball

        plot_ball(table, lam, eta1, target)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# quantize


def _cache_dir(args) -> Path:
    if args.cache_dir:
        return Path(args.cache_dir)
    env = os.environ.get("FQZ_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "fqz"


def cmd_quantize(args) -> int:
    cs, text = load_config(args.config)
    manifest = _manifest(args, text)
    cache = _cache_dir(args)
    key = manifest.digest()
    cache_file = cache / f"{key}.{args.format}"
    if not args.no_cache and cache_file.exists():
        sys.stderr.write(f"# cache hit {key}\n")
        _emit(cache_file.read_text(encoding="utf-8"), args.out)
        return EXIT_OK
    from .quantizer import coefficient_table

    j_lo, j_hi = _parse_j_range(args.j_range)
    rows_obj = coefficient_table(
        cs, list(range(j_lo, j_hi + 1)), method=args.method, tol=args.tol
    )
    cols = ["n", "method", "e_lower", "e_upper", "coef_lower", "coef_upper", "seconds"]
    rows = [
        {"n": r.n, "method": r.method, "e_lower": r.e_lower, "e_upper": r.e_upper,
         "coef_lower": r.coef_lower, "coef_upper": r.coef_upper, "seconds": r.seconds}
        for r in rows_obj
    ]
    text_out = _render_report(manifest, cols, rows, args.format)
    if not args.no_cache:
        cache.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(text_out, encoding="utf-8", newline="\n")
        (cache / f"{key}.manifest.json").write_text(manifest.canonical() + "\n", encoding="utf-8")
    _emit(text_out, args.out)
    target = _plot_target(args, "band")
    if target is not None:
        from .plots import plot_band

        plot_band(rows_obj, target)
    return EXIT_OK


def _parse_j_range(spec: str) -> tuple[int, int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return int(lo), int(hi)
    v = int(spec)
    return 1, v


# ---------------------------------------------------------------------------
# antichain / mass dumps


def cmd_antichain(args) -> int:
    cs, text = load_config(args.config)
    manifest = _manifest(args, text)
    rows = []
    if args.family == "level":
        from .asymptotics import level_family

        fam = level_family(cs, args.j, collect_words=True)
        for w in fam.members:
            rows.append({"family": f"level{args.j}", "word": str(w), "length": len(w)})
    else:
        from .asymptotics import cover_family

        if args.eps is None:
            raise ConfigError("$", "--eps required for the cover family")
        cf = cover_family(cs, Fraction(args.eps))
        for w in cf.outer:
            rows.append({"family": "cover_outer", "word": str(w), "length": len(w)})
        for sigma in cf.psi:
            for rho in cf.inner[sigma]:
                rows.append({"family": f"cover_inner[{sigma}]", "word": str(rho), "length": len(rho)})
    _emit(_render_report(manifest, ["family", "word", "length"], rows, args.format), args.out)
    return EXIT_OK


def cmd_mass(args) -> int:
    from .mass import mass_case1, mass_case2

    cs, text = load_config(args.config)
    manifest = _manifest(args, text)
    sigma = parse_word(args.word, cs.n_outer)
    rows = []
    if cs.case == "I":
        v = mass_case1(cs, sigma)
        rows.append({"word": str(sigma), "omega": "", "mass": str(v.exact), "mass_float": float(v)})
    else:
        omega = parse_word(args.omega, cs.inner.n) if args.omega is not None else None
        v = mass_case2(cs, sigma, omega)
        rows.append({"word": str(sigma), "omega": args.omega or "", "mass": str(v.exact), "mass_float": float(v)})
    _emit(_render_report(manifest, ["word", "omega", "mass", "mass_float"], rows, args.format), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _manifest(args, config_text: str) -> RunManifest:
    skip = {"config", "out", "plot_dir", "no_plot", "func", "subcommand", "no_cache", "cache_dir", "threads"}
    flags = {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None
    }
    flags.pop("seed", None)
    return RunManifest(
        subcommand=args.subcommand,
        config_sha256=hashlib.sha256(config_text.encode()).hexdigest(),
        flags={k: str(v) for k, v in flags.items()},
        seed=getattr(args, "seed", None),
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fqz", description=__doc__)
    ap.add_argument("--version", action="version", version=f"fqz {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("dim", help="dimensions and separation-condition validation")
    _config_arg(p)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("diagnose", help="identity/bound/convergence/ball suites")
    _config_arg(p)
    p.add_argument("--suite", required=True, choices=("mass", "antichain", "identity", "convergence", "ball"))
    p.add_argument("--jmax", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("quantize", help="coefficient table along the antichain sizes")
    _config_arg(p)
    p.add_argument("--j-range", default="1..6", help="like 2..8")
    p.add_argument("--method", choices=("antichain", "lloyd", "oracle"), default="antichain")
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("antichain", help="dump family members")
    _config_arg(p)
    p.add_argument("--family", choices=("level", "cover"), default="level")
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--eps", help="cover-family scale (rational like 1/8)")
    p.set_defaults(func=cmd_antichain)

    p = sub.add_parser("mass", help="evaluate one cylinder mass")
    _config_arg(p)
    p.add_argument("--word", required=True, help="outer word, e.g. 121")
    p.add_argument("--omega", help="inner word (case II)")
    p.set_defaults(func=cmd_mass)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except Exception as exc:  # resource caps, numeric failures
        from .asymptotics import CardinalityCapExceeded
        from .quantizer import BracketBudgetExceeded

        if isinstance(exc, (CardinalityCapExceeded, BracketBudgetExceeded)):
            sys.stderr.write(f"resource error: {exc}\n")
            return EXIT_ERROR
        raise


if __name__ == "__main__":
    sys.exit(main())
