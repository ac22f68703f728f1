"""Command-line surface: simulate runs, compute theory, fit avalanches, and
replicate the reference figures as plottable data files.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 insufficient
data. All outputs are deterministic given the configuration and seed; reruns
produce byte-identical CSV bodies (reals are written with 17 significant
digits, which round-trips doubles losslessly).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analytics
from .distributions import (E_INV, PriceModel, SeedSpec, Truncated,
                            critical_price, parse_model, sample)
from .engine import Rule, RunResult, run_sequence
from .errors import InsufficientDataError, ModelSpecError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4

SEED_ENV_VAR = "SOC_AUCTION_SEED"

# Canonical replicate configurations (model, size, replicas, master seed).
FIG_MODEL = "lognormal:mu=0,sigma=0.3"
FIG1A_N = 1000
FIG1A_SEED = 900          # canonical single run showing the sharp cut
FIG1B_N = 1000
FIG1B_REPLICAS = 200
FIG1B_SEED = 1005
FIG1B_GRID = (10, 20, 30, 40, 50, 75, 100, 150, 200, 300, 500, 700, 1000)
FIG2_N = 2_000_000
FIG2_SEED = 1007
FIG2_KMIN, FIG2_KMAX = 100, 10_000
FIG2_TARGET_SLOPE = -0.54
FIG2_TOLERANCE = 0.10


def _fmt(x) -> str:
    """Reals at 17 significant digits; lossless double round trip."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else _fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_seed(ns) -> int:
    if ns.seed is not None:
        return ns.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ModelSpecError(
                f"environment variable {SEED_ENV_VAR} must be an integer, "
                f"got '{env}'") from None
    return 0


def _resolve_model(ns) -> PriceModel | None:
    if ns.model is None:
        return None
    model = parse_model(ns.model)
    base = getattr(ns, "base_price", None)
    if base is not None:
        model = Truncated(base_price=base, inner=model)
    return model


def _load_prices_file(path: str) -> np.ndarray:
    text = Path(path).read_text()  # missing file surfaces as an I/O error
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise ModelSpecError(f"{path}:{lineno}: not a number: '{line}'")
        if not v > 0:
            raise ModelSpecError(f"{path}:{lineno}: prices must be > 0, got {v}")
        values.append(v)
    return np.asarray(values, dtype=float)


def _get_run(ns, seed: int) -> tuple[RunResult, PriceModel | None, np.ndarray]:
    """Prices from --prices-file (overrides model) or sampled from --model."""
    model = _resolve_model(ns)
    if ns.prices_file is not None:
        prices = _load_prices_file(ns.prices_file)
    elif model is not None:
        if ns.n < 1:
            raise ModelSpecError(f"--n must be >= 1, got {ns.n}")
        prices = sample(model, SeedSpec(seed, 0), ns.n)
    else:
        raise ModelSpecError("either --model or --prices-file is required")
    result = run_sequence(ns.rule, prices)
    return result, model, prices


def _xc_for(model: PriceModel | None, prices: np.ndarray, pc: float) -> float:
    """Theoretical critical price when the model is known, else the
    empirical pc-quantile of the submitted bids."""
    if model is not None:
        return critical_price(model, pc)
    return analytics.empirical_critical_price(prices, pc)


def _formats(ns) -> set[str]:
    fmts = {f.strip() for f in ns.format.split(",") if f.strip()}
    bad = fmts - {"csv", "json"}
    if bad:
        raise ModelSpecError(f"--format: unknown format '{sorted(bad)[0]}'")
    if not fmts:
        raise ModelSpecError("--format: need at least one of csv, json")
    return fmts


def _out_dir(ns) -> Path:
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# =====================================================================
# Subcommands
# =====================================================================

def cmd_simulate(ns) -> int:
    seed = _parse_seed(ns)
    fmts = _formats(ns)
    result, model, prices = _get_run(ns, seed)
    xc = _xc_for(model, prices, ns.pc)
    out = _out_dir(ns)

    if "csv" in fmts:
        rows = _event_rows(result, prices)
        _write_csv(out / "events.csv",
                   ["bid_index", "price", "sale_flag", "sale_price",
                    "trigger_index", "ntilde"], rows)
    if "json" in fmts:
        _write_json(out / "summary.json", {
            "n_bids": result.n_bids,
            "n_sales": result.n_sales,
            "total_income": result.total_income,
            "sales_fraction": result.sales_fraction,
            "xc_used": xc,
            "pc": ns.pc,
            "rule": Rule(ns.rule).value,
            "model": model.spec_string() if model is not None else None,
            "master_seed": None if ns.prices_file is not None else seed,
        })
    return EXIT_OK


def _event_rows(result: RunResult, prices: np.ndarray):
    """One row per submitted bid; sale columns empty when no sale fired."""
    trig = result.trigger_indices
    sale_price = result.sale_prices
    pos = 0
    n_trig = len(trig)
    for i in range(1, result.n_bids + 1):
        if pos < n_trig and trig[pos] == i:
            yield (i, float(prices[i - 1]), 1, float(sale_price[pos]), i,
                   int(result.ntilde[i - 1]))
            pos += 1
        else:
            yield (i, float(prices[i - 1]), 0, None, None,
                   int(result.ntilde[i - 1]))


def cmd_theory(ns) -> int:
    model = _resolve_model(ns)
    if model is None:
        raise ModelSpecError("--model is required")
    summary = analytics.theory_summary(model, pc=ns.pc, b=ns.b)
    payload = {"model": model.spec_string(), **summary.to_dict()}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if ns.out is not None:
        out = _out_dir(ns)
        _write_json(out / "theory.json", payload)
    print(text)
    return EXIT_OK


def cmd_avalanches(ns) -> int:
    seed = _parse_seed(ns)
    fmts = _formats(ns)
    result, model, prices = _get_run(ns, seed)
    xc = _xc_for(model, prices, ns.pc)
    avalanches = analytics.segment_avalanches(result.sale_prices, xc)
    if avalanches.n_avalanches == 0:
        raise InsufficientDataError(
            "no complete avalanches: run too short or threshold too extreme")
    survival = analytics.survival_function(
        avalanches.durations, grid="log", k_min=ns.kmin, k_max=ns.kmax)
    out = _out_dir(ns)

    # durations and survival are valid even when the tail fit is not
    if "csv" in fmts:
        _write_csv(out / "durations.csv", ["duration"],
                   ((int(d),) for d in avalanches.durations))
        _write_csv(out / "survival.csv", ["k", "survival"],
                   ((int(k), float(p)) for k, p in zip(*survival)))

    fit = analytics.fit_power_tail(survival, ns.kmin, ns.kmax,
                                   durations=avalanches.durations, seed=seed)
    if "json" in fmts:
        _write_json(out / "tail_fit.json", {
            **fit.to_dict(),
            "n_avalanches": avalanches.n_avalanches,
            "left_censored_first": avalanches.left_censored_first,
            "right_censored_last": avalanches.right_censored_last,
            "xc_used": xc,
        })
    return EXIT_OK


def _fig1b_replica(args) -> np.ndarray:
    model, n_bids, master_seed, replica_id, grid = args
    prices = sample(model, SeedSpec(master_seed, replica_id), n_bids)
    res = run_sequence(Rule.CLASSIC, prices, collect_trajectory=False)
    cum = np.cumsum(res.sale_prices)
    pos = np.searchsorted(res.trigger_indices, grid, side="right")
    return np.where(pos > 0, cum[np.maximum(pos - 1, 0)], 0.0)


def cmd_replicate(ns) -> int:
    out = _out_dir(ns)
    model = parse_model(FIG_MODEL)
    theory = analytics.theory_summary(model)
    xc = theory.xc
    rate = theory.expected_ti_per_bid

    if ns.figure == "fig1a":
        seed = ns.seed if ns.seed is not None else FIG1A_SEED
        prices = sample(model, SeedSpec(seed, 0), FIG1A_N)
        result = run_sequence(Rule.CLASSIC, prices)
        accepted = np.zeros(FIG1A_N, dtype=int)
        accepted[result.accepted_indices - 1] = 1
        _write_csv(out / "fig1a.csv", ["bid_index", "price", "accepted"],
                   ((i + 1, float(prices[i]), int(accepted[i]))
                    for i in range(FIG1A_N)))
        share = float(np.mean(result.sale_prices > xc))
        _write_json(out / "fig1a_verdict.json", {
            "figure": "fig1a", "n_bids": FIG1A_N, "seed": seed, "xc": xc,
            "share_accepted_above_xc": share, "threshold": 0.99,
            "pass": share >= 0.99,
        })

    elif ns.figure == "fig1b":
        seed = ns.seed if ns.seed is not None else FIG1B_SEED
        replicas = ns.replicas if ns.replicas is not None else FIG1B_REPLICAS
        grid = np.asarray(FIG1B_GRID, dtype=np.int64)
        jobs = [(model, FIG1B_N, seed, r, grid) for r in range(replicas)]
        if ns.threads > 1:
            with ProcessPoolExecutor(max_workers=ns.threads) as pool:
                tis = np.array(list(pool.map(_fig1b_replica, jobs, chunksize=8)))
        else:
            tis = np.array([_fig1b_replica(j) for j in jobs])
        mean = tis.mean(axis=0)
        sd = tis.std(axis=0, ddof=1)
        theory_line = rate * grid
        _write_csv(out / "fig1b.csv",
                   ["n_bids", "mean_ti", "sd_ti", "band_low", "band_high",
                    "theory_ti"],
                   ((int(n), float(m), float(s), float(m - 3 * s),
                     float(m + 3 * s), float(t))
                    for n, m, s, t in zip(grid, mean, sd, theory_line)))
        big = grid >= 50
        inside = ((theory_line >= mean - 3 * sd)
                  & (theory_line <= mean + 3 * sd))
        _write_json(out / "fig1b_verdict.json", {
            "figure": "fig1b", "n_bids": FIG1B_N, "replicas": replicas,
            "seed": seed, "ti_per_bid_theory": rate,
            "n_grid_points": int(len(grid)),
            "all_inside_band_n_ge_50": bool(inside[big].all()),
            "pass": bool(inside[big].all()),
        })

    else:  # fig2
        seed = ns.seed if ns.seed is not None else FIG2_SEED
        prices = sample(model, SeedSpec(seed, 0), FIG2_N)
        result = run_sequence(Rule.CLASSIC, prices, collect_trajectory=False)
        avalanches = analytics.segment_avalanches(result.sale_prices, xc)
        survival = analytics.survival_function(
            avalanches.durations, grid="log", k_min=FIG2_KMIN, k_max=FIG2_KMAX)
        fit = analytics.fit_power_tail(survival, FIG2_KMIN, FIG2_KMAX,
                                       durations=avalanches.durations,
                                       seed=seed)
        ks, ps = survival
        anchor = ps[0] / ks[0] ** fit.slope
        _write_csv(out / "fig2.csv", ["k", "survival", "fit_survival"],
                   ((int(k), float(p), float(anchor * k ** fit.slope))
                    for k, p in zip(ks, ps)))
        err = abs(fit.slope - FIG2_TARGET_SLOPE)
        _write_json(out / "fig2_verdict.json", {
            "figure": "fig2", "n_bids": FIG2_N, "seed": seed,
            "n_avalanches": avalanches.n_avalanches,
            "slope": fit.slope, "stderr": fit.stderr,
            "target_slope": FIG2_TARGET_SLOPE, "tolerance": FIG2_TOLERANCE,
            "pass": bool(err <= FIG2_TOLERANCE),
        })
    return EXIT_OK


# =====================================================================
# Parser
# =====================================================================

def _add_run_flags(p: argparse.ArgumentParser, with_model=True) -> None:
    if with_model:
        p.add_argument("--model", help="price model spec, e.g. lognormal:mu=0,sigma=0.3")
        p.add_argument("--base-price", type=float, default=None,
                       help="truncate the model below this base price")
    p.add_argument("--seed", type=int, default=None,
                   help=f"master seed (fallback: ${SEED_ENV_VAR}, then 0)")
    p.add_argument("--pc", type=float, default=E_INV,
                   help="never-accepted fraction for the critical price (default 1/e)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", default="csv,json",
                   help="comma list from {csv,json} (default both)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap for replica parallelism (results unchanged)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soc-auction",
        description="Highest-remaining-bid auction: simulation and analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one auction, write event log + summary")
    p.add_argument("--rule", choices=[r.value for r in Rule], default="classic")
    p.add_argument("--n", type=int, default=1000, help="number of bids")
    p.add_argument("--prices-file", default=None,
                   help="one price per line; overrides --model")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="theoretical summary for a price model")
    p.add_argument("--model", required=False,
                   help="price model spec, e.g. lognormal:mu=0,sigma=0.3")
    p.add_argument("--base-price", type=float, default=None)
    p.add_argument("--pc", type=float, default=E_INV)
    p.add_argument("--b", type=float, default=analytics.B_DEFAULT,
                   help="accepted-count variance constant")
    p.add_argument("--out", default=None, help="also write theory.json here")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("avalanches", help="segment avalanches and fit the tail")
    p.add_argument("--rule", choices=[r.value for r in Rule], default="classic")
    p.add_argument("--n", type=int, default=2_000_000)
    p.add_argument("--prices-file", default=None)
    p.add_argument("--kmin", type=int, default=100)
    p.add_argument("--kmax", type=int, default=10_000)
    _add_run_flags(p)
    p.set_defaults(func=cmd_avalanches)

    p = sub.add_parser("replicate", help="reproduce a reference figure as data")
    p.add_argument("figure", choices=["fig1a", "fig1b", "fig2"])
    p.add_argument("--replicas", type=int, default=None,
                   help="override the canonical replica count (fig1b)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the canonical master seed")
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except ModelSpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
