"""Experiment driver.

Each subcommand runs one experiment family, echoes its configuration, and
emits one record per sweep point as CSV or JSON. Data rows are a pure
function of the configuration and seed (timestamps and runtimes live in the
metadata, never in rows), so identical invocations produce byte-identical
rows. Floats are printed with 17 significant digits and round-trip exactly.

Exit codes: 0 success, 1 internal error, 2 no-reversal condition, 64 usage.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import complexity, protocol, wavepacket
from .channel import SwapSchedule, dme_error_bound, partial_swap_evolve
from .errors import InfiniteThresholdError
from .linalg import spectral_norm, trace_distance
from .sampling import SplitMix64, gue_hamiltonian, random_density, random_pure_state
from .states import DensityMatrix, Hamiltonian


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(64)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, dict):
        return "{" + ", ".join(f'{_json_value(str(k))}: {_json_value(x)}' for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"unsupported value {v!r}")


def _emit(args, experiment: str, config: dict, columns: list[str], rows: list[dict], summary: dict, runtime_ms: float) -> None:
    timestamp = datetime.now(timezone.utc).isoformat()
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        if args.format == "csv":
            out.write(f"# experiment: {experiment}\n")
            out.write(f"# timestamp: {timestamp}\n")
            out.write(f"# runtime_ms: {runtime_ms:.3f}\n")
            out.write(f"# config: {_json_value(config)}\n")
            for k, v in summary.items():
                out.write(f"# {k}: {_fmt(v)}\n")
            out.write(",".join(columns) + "\n")
            for row in rows:
                out.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
        else:
            body = ",\n".join(
                "    {" + ", ".join(f'"{c}": {_json_value(row.get(c))}' for c in columns) + "}"
                for row in rows
            )
            out.write("{\n")
            out.write(f'  "experiment": {_json_value(experiment)},\n')
            out.write(f'  "timestamp": {_json_value(timestamp)},\n')
            out.write(f'  "runtime_ms": {runtime_ms:.3f},\n')
            out.write(f'  "config": {_json_value(config)},\n')
            out.write(f'  "summary": {_json_value(summary)},\n')
            out.write('  "rows": [\n' + body + "\n  ]\n}\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _pool_map(fn, payloads, threads: int):
    if threads <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, payloads))


# ---------------------------------------------------------------------------
# reverse


def cmd_reverse(args) -> int:
    t0 = time.perf_counter()
    rng = SplitMix64(args.seed)
    h = gue_hamiltonian(rng, args.dim)
    rho0 = random_pure_state(rng, args.dim)
    rho_t = h.evolve(rho0, args.tau)

    if args.ancilla == "complement":
        anc = protocol.complement_ancilla(h)
    else:
        if args.beta is None:
            raise ValueError("--beta is required with --ancilla thermal")
        anc = protocol.thermal_ancilla(h, args.beta)
    omega = args.omega_mult * protocol.threshold_rate(anc)

    _, rep = protocol.run_reversal(
        rho_t, h, anc, omega=omega, tau=args.tau, n_steps=args.n, drift_enabled=not args.no_drift
    )
    row = {
        "dim": args.dim,
        "seed": args.seed,
        "ancilla": anc.kind,
        "beta": anc.beta,
        "omega": rep.omega,
        "omega_mult": args.omega_mult,
        "threshold_omega": rep.threshold_omega,
        "tau": rep.tau_protocol,
        "n_steps": rep.n_steps,
        "tau_requested": rep.tau_requested,
        "net_backward_shift": rep.net_backward_shift,
        "error_measured": rep.error_measured,
        "error_bound": rep.error_bound,
        "trace_distance": rep.trace_distance_to_target,
        "no_reversal": rep.no_reversal,
    }
    columns = list(row.keys())
    _emit(args, "reverse", _config_echo(args), columns, [row],
          {}, (time.perf_counter() - t0) * 1e3)
    return 2 if rep.no_reversal else 0


# ---------------------------------------------------------------------------
# sweep-n


def _sweep_n_point(payload) -> dict:
    rho_m, sigma_m, omega_tau, n = payload
    rho = DensityMatrix(rho_m)
    sigma = DensityMatrix(sigma_m)
    sched = SwapSchedule(omega=omega_tau, tau=1.0, n_steps=n)
    out, _ = partial_swap_evolve(rho, sigma, sched)
    w, v = np.linalg.eigh(sigma_m)
    prop = (v * np.exp(-1j * omega_tau * w)) @ v.conj().T
    target = prop @ rho_m @ prop.conj().T
    delta = out.matrix - target
    return {
        "n_steps": n,
        "omega_tau": omega_tau,
        "error_measured": spectral_norm((delta + delta.conj().T) / 2),
        "error_bound": dme_error_bound(rho, sigma, omega_tau, n),
        "trace_distance": trace_distance(out.matrix, target),
    }


def cmd_sweep_n(args) -> int:
    t0 = time.perf_counter()
    n_values = _int_list(args.n)
    if len(n_values) < 3:
        raise ValueError("sweep-n needs at least 3 values in --n")
    rng = SplitMix64(args.seed)
    rho = random_density(rng, args.dim)
    sigma = random_density(rng, args.dim)
    payloads = [(rho.matrix, sigma.matrix, args.omega_tau, n) for n in n_values]
    rows = _pool_map(_sweep_n_point, payloads, args.threads)

    summary = {}
    errs = np.array([r["error_measured"] for r in rows])
    if args.omega_tau != 0 and np.all(errs > 0):
        slope = float(np.polyfit(np.log(n_values), np.log(errs), 1)[0])
        summary["loglog_slope"] = slope
    columns = ["n_steps", "omega_tau", "error_measured", "error_bound", "trace_distance"]
    _emit(args, "sweep-n", _config_echo(args), columns, rows, summary,
          (time.perf_counter() - t0) * 1e3)
    return 0


# ---------------------------------------------------------------------------
# thermal-sweep


def _thermal_point(payload) -> dict:
    h_m, rho_m, beta, omega_mult, tau, n = payload
    h = Hamiltonian.from_matrix(h_m)
    rho_t = DensityMatrix(rho_m)
    if beta == 0.0:
        return {
            "beta": 0.0, "omega": None, "threshold_omega": None,
            "error_measured": None, "error_bound": None, "delta2_norm": None,
            "trace_distance": None, "infinite_threshold": True, "is_bound_argmin": False,
        }
    anc = protocol.thermal_ancilla(h, beta)
    omega = omega_mult * protocol.threshold_rate(anc)
    _, rep = protocol.run_reversal(rho_t, h, anc, omega=omega, tau=tau, n_steps=n)
    rho_past = h.evolve(rho_t, -rep.net_backward_shift)
    delta2 = protocol.thermal_linearization_error(rho_past, h, beta, tau)
    return {
        "beta": beta,
        "omega": omega,
        "threshold_omega": rep.threshold_omega,
        "error_measured": rep.error_measured,
        "error_bound": rep.error_bound,
        "delta2_norm": spectral_norm((delta2 + delta2.conj().T) / 2),
        "trace_distance": rep.trace_distance_to_target,
        "infinite_threshold": False,
        "is_bound_argmin": False,
    }


def cmd_thermal_sweep(args) -> int:
    t0 = time.perf_counter()
    betas = _float_list(args.beta)
    if any(b < 0 for b in betas):
        raise ValueError("negative beta in --beta")
    rng = SplitMix64(args.seed)
    h = gue_hamiltonian(rng, args.dim).shifted_to_zero_ground()
    rho_t = random_density(rng, args.dim)
    payloads = [(h.matrix, rho_t.matrix, b, args.omega_mult, args.tau, args.n) for b in betas]
    rows = _pool_map(_thermal_point, payloads, args.threads)

    bounded = [(i, r["error_bound"]) for i, r in enumerate(rows) if r["error_bound"] is not None]
    summary = {}
    if bounded:
        argmin_i = min(bounded, key=lambda t: t[1])[0]
        rows[argmin_i]["is_bound_argmin"] = True
        summary["bound_argmin_beta"] = rows[argmin_i]["beta"]
    summary["optimal_beta"] = protocol.optimal_beta(h, args.n, args.tau)
    columns = ["beta", "omega", "threshold_omega", "error_measured", "error_bound",
               "delta2_norm", "trace_distance", "infinite_threshold", "is_bound_argmin"]
    _emit(args, "thermal-sweep", _config_echo(args), columns, rows, summary,
          (time.perf_counter() - t0) * 1e3)
    return 0


# ---------------------------------------------------------------------------
# entropy-bound


def cmd_entropy_bound(args) -> int:
    t0 = time.perf_counter()
    dims = _int_list(args.dim)
    ks = _float_list(args.k)
    rows = []
    for d in dims:
        log2d = math.log2(d)
        for k in ks:
            out_of_regime = k > log2d
            row = {
                "dim": d,
                "k_bits": k,
                "p1_approx": k / log2d,
                "p1_exact": None,
                "n_bound": None,
                "out_of_regime": out_of_regime,
            }
            if not out_of_regime:
                s = math.log(d) - k * math.log(2)
                row["p1_exact"] = complexity.max_top_eigenvalue(d, s)
                est = complexity.steps_high_entropy(
                    complexity.EntropySpec(d, s), args.eps, args.tau_r, args.tau_tilde
                )
                row["n_bound"] = est.n_steps
            rows.append(row)
    columns = ["dim", "k_bits", "p1_exact", "p1_approx", "n_bound", "out_of_regime"]
    _emit(args, "entropy-bound", _config_echo(args), columns, rows, {},
          (time.perf_counter() - t0) * 1e3)
    return 0


# ---------------------------------------------------------------------------
# wavepacket


def cmd_wavepacket(args) -> int:
    t0 = time.perf_counter()
    cfg = wavepacket.WavePacketConfig(
        xi0=args.xi0, mass=args.mass, grid_points=args.grid_points, p_max=args.p_max
    )
    cost = wavepacket.reversal_cost(cfg, args.tau, args.eps)
    beta = args.beta if args.beta is not None else cost.beta_opt
    n_steps = args.n if args.n is not None else int(math.ceil(cost.n_steps))
    h = wavepacket.free_hamiltonian(cfg)
    anc = protocol.thermal_ancilla(h, beta)
    omega = args.omega_mult * protocol.threshold_rate(anc)

    widths, rep = wavepacket.spread_and_refocus(
        cfg, args.tau, omega=omega, n_steps=n_steps, beta=beta, budget=args.budget
    )
    dt = rep.tau_protocol / n_steps
    rows = [{"step": s, "time": s * dt, "width": w} for s, w in widths]
    summary = {
        "xi0": cfg.xi0,
        "xi_tau": wavepacket.spread_estimate(cfg, args.tau).xi_tau,
        "beta": beta,
        "omega": omega,
        "n_steps": n_steps,
        "final_width": widths[-1][1],
        "error_measured": rep.error_measured,
        "error_bound": rep.error_bound,
        "trace_distance": rep.trace_distance_to_target,
        "no_reversal": rep.no_reversal,
    }
    columns = ["step", "time", "width"]
    _emit(args, "wavepacket", _config_echo(args), columns, rows, summary,
          (time.perf_counter() - t0) * 1e3)
    return 2 if rep.no_reversal else 0


# ---------------------------------------------------------------------------


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> _Parser:
    parser = _Parser(
        prog="qrewind",
        description="Rewind experiments for unknown quantum states via partial-swap ancillas.",
        epilog="CSV columns are fixed per subcommand and listed in each subcommand's help.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="PRNG seed; fixes every random instance")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker pool size for sweep points")
        p.add_argument("--budget", type=float, default=None,
                       help="max estimated scalar ops (default 1e9)")

    p = sub.add_parser("reverse", help="single rewind run; columns: dim,seed,ancilla,beta,"
                       "omega,omega_mult,threshold_omega,tau,n_steps,tau_requested,"
                       "net_backward_shift,error_measured,error_bound,trace_distance,no_reversal")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--omega-mult", type=float, default=2.0,
                   help="rate as a multiple of the threshold rate")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--ancilla", choices=["complement", "thermal"], default="complement")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--no-drift", action="store_true", help="suspend the system's own evolution")
    common(p)
    p.set_defaults(func=cmd_reverse)

    p = sub.add_parser("sweep-n", help="channel error vs step count; columns: n_steps,"
                       "omega_tau,error_measured,error_bound,trace_distance")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--omega-tau", type=float, default=0.5)
    p.add_argument("--n", type=str, default="16,32,64,128,256,512,1024",
                   help="comma-separated step counts (at least 3)")
    common(p)
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("thermal-sweep", help="thermal path over beta; columns: beta,omega,"
                       "threshold_omega,error_measured,error_bound,delta2_norm,trace_distance,"
                       "infinite_threshold,is_bound_argmin")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--omega-mult", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--beta", type=str, default="0.4,0.2,0.1,0.05",
                   help="comma-separated inverse temperatures")
    common(p)
    p.set_defaults(func=cmd_thermal_sweep)

    p = sub.add_parser("entropy-bound", help="entropy-limited norm and step bound; columns: "
                       "dim,k_bits,p1_exact,p1_approx,n_bound,out_of_regime")
    p.add_argument("--dim", type=str, default="4,16,1048576", help="comma-separated dimensions")
    p.add_argument("--k", type=str, default="1,2,3", help="comma-separated bit deficits")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--tau-r", type=float, default=1.0)
    p.add_argument("--tau-tilde", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_entropy_bound)

    p = sub.add_parser("wavepacket", help="spread-and-refocus demo; columns: step,time,width")
    p.add_argument("--grid-points", type=int, default=32)
    p.add_argument("--xi0", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--p-max", type=float, default=5.0)
    p.add_argument("--tau", type=float, default=3.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=None,
                   help="ancilla inverse temperature (default: optimal estimate)")
    p.add_argument("--omega-mult", type=float, default=2.0)
    p.add_argument("--n", type=int, default=None, help="step count (default: cost estimate)")
    common(p)
    p.set_defaults(func=cmd_wavepacket)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 64
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - map to documented exit code
        sys.stderr.write(f"qrewind: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
