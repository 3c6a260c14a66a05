"""Command-line driver: single runs, parameter sweeps, chain evolution,
and a built-in oracle check suite.

Results are written as CSV files with a header line plus a JSON sidecar
carrying the configuration echo, seed, PRNG name, and code version. File
names embed a hash of the generating configuration, so a rerun with the
same configuration rewrites the same bytes and never accumulates
conflicting rows. Every run carries invariant checks (orthogonality error
for Lanczos runs, norm conservation for evolution runs); the exit code is
nonzero if any check fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import evolve_chain, krylov_complexity
from .engine import LanczosConfig, run_lanczos
from .models import (
    EastParams,
    SykParams,
    build_operator,
    build_quantum_east,
    build_syk,
    synthetic_largeq_chain,
)
from .observables import (
    DENSE_EIGENSOLVE_LIMIT,
    BSequence,
    disorder_average,
    krylov_variance,
    rescale,
    spectral_bounds,
)
from .oracles import bn_from_moments, moments

EPSILON_LIMIT = 1e-8
NORM_LIMIT = 1e-8
PRNG_NAME = "PCG64"

_PRIMARY_PARAM = {"syk": "kappa", "east": "s", "synthetic": "j"}
_DEFAULT_REALIZATIONS = {"syk": 5, "east": 1, "synthetic": 1}
_EMIT_KINDS = ("bn", "sigma", "kt", "epsilon")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _config_digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_sidecar(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _parse_params(entries: list[str] | None) -> dict[str, list[float]]:
    params: dict[str, list[float]] = {}
    for entry in entries or []:
        name, sep, raw = entry.partition("=")
        if not sep or not name:
            raise SystemExit(f"bad --param {entry!r}; expected name=value")
        try:
            value = float(raw)
        except ValueError:
            raise SystemExit(f"bad --param value in {entry!r}") from None
        params.setdefault(name, []).append(value)
    return params


def _default_operator(model: str, size: int | None) -> str | None:
    if model == "syk":
        return "chi:1"
    if model == "east":
        return f"n:{size // 2}"
    return None


def _single_values(params: dict[str, list[float]], command: str) -> dict[str, float]:
    flat: dict[str, float] = {}
    for name, values in params.items():
        if len(values) != 1:
            raise SystemExit(
                f"{command} takes one value per parameter; {name} has {len(values)}"
            )
        flat[name] = values[0]
    return flat


def _run_unit(task: dict) -> dict:
    """One (sweep value, realization) Lanczos run; shaped for a worker pool."""
    model = task["model"]
    max_steps = task["max_steps"]
    if model == "synthetic":
        seq = synthetic_largeq_chain(task["params"].get("j", 1.0), max_steps)
        b_raw = seq.values
        b_rescaled = np.full(b_raw.size, np.nan)
        eps = np.zeros(b_raw.size)
    else:
        if model == "syk":
            h = build_syk(
                SykParams(
                    n_majorana=task["size"],
                    kappa=task["params"].get("kappa", 0.0),
                    j_coupling=task["params"].get("j", 1.0),
                    seed=task["seed"],
                    realization=task["realization"],
                )
            )
            op = build_operator(task["operator"], n_majorana=task["size"])
        else:
            h = build_quantum_east(
                EastParams(
                    length=task["size"],
                    s=task["params"]["s"],
                    effective=bool(task["params"].get("effective", 1.0)),
                )
            )
            op = build_operator(task["operator"], length=task["size"])
        result = run_lanczos(h, op, LanczosConfig(max_steps=max_steps))
        b_raw = result.b_raw
        eps = result.epsilon
        if b_raw.size and h.matrix.shape[0] <= DENSE_EIGENSOLVE_LIMIT:
            b_rescaled = rescale(BSequence(b_raw), bounds=spectral_bounds(h)).values
        else:
            b_rescaled = np.full(b_raw.size, np.nan)
    return {
        "param_value": task["param_value"],
        "realization": task["realization"],
        "b_raw": np.asarray(b_raw, dtype=float),
        "b_rescaled": np.asarray(b_rescaled, dtype=float),
        "epsilon": np.asarray(eps, dtype=float),
    }


def _execute_units(tasks: list[dict], threads: int) -> list[dict]:
    if threads <= 1 or len(tasks) <= 1:
        outputs = [_run_unit(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(_run_unit, tasks))
    outputs.sort(key=lambda unit: (unit["param_value"], unit["realization"]))
    return outputs


def _make_tasks(args, params: dict[str, list[float]], sweep_name: str,
                sweep_values: list[float], realizations: int) -> list[dict]:
    fixed = {name: values[0] for name, values in params.items() if name != sweep_name}
    tasks = []
    for value in sweep_values:
        for realization in range(realizations):
            tasks.append(
                {
                    "model": args.model,
                    "size": args.size,
                    "params": {**fixed, sweep_name: value},
                    "param_value": value,
                    "operator": args.operator,
                    "max_steps": args.max_steps,
                    "seed": args.seed,
                    "realization": realization,
                }
            )
    return tasks


def _resolve_sweep(args, params: dict[str, list[float]], command: str):
    primary = _PRIMARY_PARAM[args.model]
    multi = [name for name, values in params.items() if len(values) > 1]
    if command == "sweep":
        if len(multi) > 1:
            raise SystemExit(f"sweep over one parameter at a time, got {multi}")
        sweep_name = multi[0] if multi else primary
    else:
        if multi:
            raise SystemExit(f"{command} takes one value per parameter; sweep {multi[0]} with the sweep command")
        sweep_name = primary
    if sweep_name not in params:
        if args.model == "synthetic" and sweep_name == "j":
            params[sweep_name] = [1.0]
        else:
            raise SystemExit(f"model {args.model!r} needs --param {sweep_name}=...")
    return sweep_name, params[sweep_name]


def _common_payload(args, command: str, params: dict[str, list[float]]) -> dict:
    return {
        "command": command,
        "model": args.model,
        "size": args.size,
        "params": params,
        "operator": args.operator,
        "cutoff": args.cutoff,
        "max_steps": args.max_steps,
        "realizations": args.realizations,
        "seed": args.seed,
        "version": __version__,
    }


def _check_model_args(args) -> None:
    if args.model in ("syk", "east") and args.size is None:
        raise SystemExit(f"--size is required for model {args.model!r}")
    if args.model == "syk" and (args.size % 2 or args.size < 4):
        raise SystemExit("--size for the Majorana model must be even and >= 4")
    if args.operator is None:
        args.operator = _default_operator(args.model, args.size)
    if args.realizations is None:
        args.realizations = _DEFAULT_REALIZATIONS[args.model]
    if args.realizations < 1:
        raise SystemExit("--realizations must be >= 1")
    if args.beta != 0.0:
        print("finite temperature not implemented", file=sys.stderr)
        raise SystemExit(2)


def _emit_bn_files(args, command: str, outputs: list[dict], params, out_dir: Path) -> list[Path]:
    primary = _PRIMARY_PARAM[args.model]
    written = []
    for unit in outputs:
        payload = _common_payload(args, command, params)
        payload["param_value"] = unit["param_value"]
        payload["realization"] = unit["realization"]
        run_id = _config_digest(payload)
        config_hash = run_id
        rows = []
        for i in range(unit["b_raw"].size):
            rows.append(
                [
                    run_id,
                    args.model,
                    primary,
                    unit["param_value"],
                    unit["realization"],
                    i + 1,
                    unit["b_raw"][i],
                    unit["b_rescaled"][i],
                    unit["epsilon"][i],
                    args.seed,
                    config_hash,
                ]
            )
        path = out_dir / f"bn_{run_id}.csv"
        _write_csv(
            path,
            [
                "run_id",
                "model",
                "param_name",
                "param_value",
                "realization",
                "n",
                "b_raw",
                "b_rescaled",
                "epsilon_n",
                "master_seed",
                "config_hash",
            ],
            rows,
        )
        max_eps = float(unit["epsilon"].max()) if unit["epsilon"].size else 0.0
        _write_sidecar(
            out_dir / f"bn_{run_id}.json",
            {
                "run_id": run_id,
                "config": payload,
                "master_seed": args.seed,
                "prng": PRNG_NAME,
                "code_version": __version__,
                "checks": {
                    "epsilon_limit": EPSILON_LIMIT,
                    "max_epsilon": max_eps,
                    "passed": max_eps < EPSILON_LIMIT,
                },
            },
        )
        written.append(path)
    return written


def _cmd_lanczos(args) -> int:
    params = _parse_params(args.param)
    _check_model_args(args)
    sweep_name, sweep_values = _resolve_sweep(args, params, "lanczos")
    tasks = _make_tasks(args, params, sweep_name, sweep_values, args.realizations)
    outputs = _execute_units(tasks, args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit = set(args.emit.split(",")) if args.emit else {"bn"}
    _validate_emit(emit)
    written = []
    if emit & {"bn", "epsilon"}:
        written += _emit_bn_files(args, "lanczos", outputs, params, out_dir)
    for path in written:
        print(path)
    worst = max((float(u["epsilon"].max()) for u in outputs if u["epsilon"].size), default=0.0)
    if worst >= EPSILON_LIMIT:
        print(f"invariant check failed: max epsilon_n = {worst:.3e}", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    params = _parse_params(args.param)
    _check_model_args(args)
    sweep_name, sweep_values = _resolve_sweep(args, params, "sweep")
    if not sweep_values:
        raise SystemExit("sweep list must be non-empty")
    tasks = _make_tasks(args, params, sweep_name, sweep_values, args.realizations)
    outputs = _execute_units(tasks, args.threads)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit = set(args.emit.split(",")) if args.emit else {"sigma"}
    _validate_emit(emit)

    payload = _common_payload(args, "sweep", params)
    payload["sweep_name"] = sweep_name
    run_id = _config_digest(payload)
    rows = []
    by_value: dict[float, list] = {}
    for unit in outputs:
        by_value.setdefault(unit["param_value"], []).append(unit)
    worst_eps = 0.0
    for value in sorted(by_value):
        records = []
        for unit in by_value[value]:
            if unit["epsilon"].size:
                worst_eps = max(worst_eps, float(unit["epsilon"].max()))
            records.append(
                krylov_variance(
                    unit["b_raw"],
                    cutoff=args.cutoff,
                    provenance={"realization": unit["realization"]},
                )
            )
        averaged = disorder_average(records)
        rows.append(
            [
                run_id,
                value,
                args.cutoff,
                records[0].pairs_used,
                averaged.sigma_bar,
                averaged.sigma_bar_sq,
                averaged.realizations,
                args.seed,
                run_id,
            ]
        )
    written = []
    if "sigma" in emit:
        path = out_dir / f"sigma_{run_id}.csv"
        _write_csv(
            path,
            [
                "run_id",
                "param_value",
                "cutoff",
                "pairs_used",
                "sigma_bar",
                "sigma_bar_sq",
                "realizations",
                "master_seed",
                "config_hash",
            ],
            rows,
        )
        _write_sidecar(
            out_dir / f"sigma_{run_id}.json",
            {
                "run_id": run_id,
                "config": payload,
                "master_seed": args.seed,
                "prng": PRNG_NAME,
                "code_version": __version__,
                "checks": {
                    "epsilon_limit": EPSILON_LIMIT,
                    "max_epsilon": worst_eps,
                    "passed": worst_eps < EPSILON_LIMIT,
                },
            },
        )
        written.append(path)
    if emit & {"bn", "epsilon"}:
        written += _emit_bn_files(args, "sweep", outputs, params, out_dir)
    for path in written:
        print(path)
    if worst_eps >= EPSILON_LIMIT:
        print(f"invariant check failed: max epsilon_n = {worst_eps:.3e}", file=sys.stderr)
        return 1
    return 0


def _cmd_evolve(args) -> int:
    params = _parse_params(args.param)
    _check_model_args(args)
    flat = _single_values(params, "evolve")
    primary = _PRIMARY_PARAM[args.model]
    if args.model != "synthetic" and primary not in flat:
        raise SystemExit(f"model {args.model!r} needs --param {primary}=...")
    task = {
        "model": args.model,
        "size": args.size,
        "params": flat,
        "param_value": flat.get(primary, 1.0),
        "operator": args.operator,
        "max_steps": args.max_steps,
        "seed": args.seed,
        "realization": 0,
    }
    unit = _run_unit(task)
    times = np.linspace(0.0, args.t_max, args.time_points)
    evo = evolve_chain(unit["b_raw"], times, method=args.method)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = _common_payload(args, "evolve", params)
    payload.update({"t_max": args.t_max, "time_points": args.time_points, "method": args.method})
    run_id = _config_digest(payload)
    complexity = krylov_complexity(evo)
    rows = []
    for k, t in enumerate(times):
        weight = float(np.sum(evo.phi[k] ** 2))
        rows.append(
            [
                run_id,
                args.model,
                primary,
                task["param_value"],
                float(t),
                float(evo.phi[k, 0]),
                float(complexity[k]),
                weight,
                float(evo.norm_error[k]),
                args.seed,
                run_id,
            ]
        )
    path = out_dir / f"kt_{run_id}.csv"
    _write_csv(
        path,
        [
            "run_id",
            "model",
            "param_name",
            "param_value",
            "t",
            "phi0",
            "k_complexity",
            "norm",
            "norm_error",
            "master_seed",
            "config_hash",
        ],
        rows,
    )
    worst = float(evo.norm_error.max())
    _write_sidecar(
        out_dir / f"kt_{run_id}.json",
        {
            "run_id": run_id,
            "config": payload,
            "master_seed": args.seed,
            "prng": PRNG_NAME,
            "code_version": __version__,
            "checks": {
                "norm_limit": NORM_LIMIT,
                "max_norm_error": worst,
                "passed": worst < NORM_LIMIT,
            },
        },
    )
    print(path)
    if worst >= NORM_LIMIT:
        print(f"invariant check failed: max norm error = {worst:.3e}", file=sys.stderr)
        return 1
    return 0


def _validate_emit(emit: set[str]) -> None:
    unknown = emit - set(_EMIT_KINDS)
    if unknown:
        raise SystemExit(f"unknown emit kinds {sorted(unknown)}; valid: {_EMIT_KINDS}")


def _cmd_check(_args) -> int:
    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        if not ok:
            failures += 1
        tag = "ok" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"{tag}: {name}{suffix}")

    h2 = np.diag([1.0, -1.0])
    o2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    res2 = run_lanczos(h2, o2, LanczosConfig(max_steps=10))
    ok = res2.krylov_dim_reached == 2 and abs(res2.b_raw[0] - 2.0) < 1e-10
    report("two-level Krylov space: dim 2, b_1 = 2", ok, f"b_1 = {res2.b_raw[0]:.12f}")

    times = np.linspace(0.0, 5.0, 101)
    evo = evolve_chain(res2.b_raw, times)
    drift = float(np.max(np.abs(krylov_complexity(evo) - np.sin(2.0 * times) ** 2)))
    report("two-level K(t) = sin^2(2t)", drift < 1e-8, f"max dev = {drift:.3e}")

    rng = np.random.default_rng(7)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h6 = a + a.conj().T
    c = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    o6 = c + c.conj().T
    res6 = run_lanczos(h6, o6, LanczosConfig(max_steps=8))
    mu = moments(h6, o6, k_max=12, exact=True)
    b_oracle = bn_from_moments(mu)
    k = min(res6.b_raw.size, b_oracle.size, 6)
    dev = float(np.max(np.abs(res6.b_raw[:k] - b_oracle[:k])))
    report("Lanczos b_n match the moment recursion", dev < 1e-6, f"max dev = {dev:.3e}")

    res6t = run_lanczos(
        h6,
        o6,
        LanczosConfig(max_steps=8, liouvillian_kind="tilde", enforce_hermiticity=False),
    )
    kk = min(res6.b_raw.size, res6t.b_raw.size)
    dev_t = float(np.max(np.abs(res6.b_raw[:kk] - res6t.b_raw[:kk])))
    report("standard and tilde generators give equal b_n", dev_t < 1e-8, f"max dev = {dev_t:.3e}")

    seq = synthetic_largeq_chain(1.0, 400)
    var = krylov_variance(seq, cutoff=1)
    report(
        "synthetic ergodic chain has small coefficient variance",
        var.sigma_sq < 0.05,
        f"sigma^2 = {var.sigma_sq:.3e}",
    )

    unit_a = _run_unit(
        {
            "model": "east",
            "size": 5,
            "params": {"s": 0.5},
            "param_value": 0.5,
            "operator": "n:2",
            "max_steps": 40,
            "seed": 0,
            "realization": 0,
        }
    )
    unit_b = _run_unit(
        {
            "model": "east",
            "size": 5,
            "params": {"s": 0.5},
            "param_value": 0.5,
            "operator": "n:2",
            "max_steps": 40,
            "seed": 0,
            "realization": 0,
        }
    )
    same = np.array_equal(unit_a["b_raw"], unit_b["b_raw"]) and np.array_equal(
        unit_a["epsilon"], unit_b["epsilon"]
    )
    report("identical configs give identical runs", same)

    return 0 if failures == 0 else 1


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", choices=("syk", "east", "synthetic"), required=True)
    sub.add_argument("--size", type=int, default=None,
                     help="Majorana count for syk, chain length for east")
    sub.add_argument("--param", action="append", metavar="NAME=VALUE",
                     help="model parameter; repeat a name to sweep it")
    sub.add_argument("--operator", default=None,
                     help="starting operator spec, e.g. n:4, sx:3, chi:1 or chi:1,2")
    sub.add_argument("--cutoff", type=int, default=50)
    sub.add_argument("--max-steps", type=int, default=1000, dest="max_steps")
    sub.add_argument("--realizations", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--beta", type=float, default=0.0,
                     help="inverse temperature; only 0 is supported")
    sub.add_argument("--out", default=".")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--emit", default=None,
                     help="comma-separated artifact kinds: bn,sigma,kt,epsilon")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="opkrylov",
        description="Operator-Krylov runs: Lanczos coefficients, variance sweeps, chain evolution.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_lanczos = subparsers.add_parser("lanczos", help="emit b_n files per (parameter, realization)")
    _add_run_flags(p_lanczos)
    p_lanczos.set_defaults(func=_cmd_lanczos)

    p_sweep = subparsers.add_parser("sweep", help="emit coefficient-variance files across a sweep")
    _add_run_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_evolve = subparsers.add_parser("evolve", help="emit phi_0, K(t), norm error time series")
    _add_run_flags(p_evolve)
    p_evolve.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    p_evolve.add_argument("--time-points", type=int, default=201, dest="time_points")
    p_evolve.add_argument("--method", choices=("eigen", "rk4"), default="eigen")
    p_evolve.set_defaults(func=_cmd_evolve)

    p_check = subparsers.add_parser("check", help="run the built-in oracle suite")
    p_check.set_defaults(func=_cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
