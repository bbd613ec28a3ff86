"""``flq`` command line: decompose, evolve, steady, verify and parameter sweeps.

Exit status: 0 success, 1 verification failed, 2 invalid configuration,
3 numerical failure (diagnostics written to ``error.json``).
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from threadpoolctl import threadpool_limits

from flq import io
from flq.config import RunConfig, build_model, load_raw, set_path, to_matrix, with_overrides
from flq.errors import (
    DegeneracyAmbiguityError,
    FlqError,
    InvalidArgumentError,
    ModelRejectionError,
    NumericFailure,
    OutOfRangeError,
)
from flq.floquet import decompose
from flq.linalg import fro
from flq.models import SM, SP, SX, SY, SZ, ladder
from flq.pipeline import assemble, harmonics_for, solve
from flq.verify import verify_all

COMMANDS = ("decompose", "evolve", "steady", "verify", "sweep")
EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

PAULIS = {"sx": SX, "sy": SY, "sz": SZ, "sp": SP, "sm": SM}


def named_observable(name: str, d: int) -> np.ndarray:
    if name in PAULIS:
        if d != 2:
            raise InvalidArgumentError(f"observable {name!r} needs a two-level system, dimension is {d}")
        return PAULIS[name]
    a = ladder(d)
    if name == "n":
        return a.conj().T @ a
    if name == "x":
        return a + a.conj().T
    raise InvalidArgumentError(f"unknown observable {name!r}; use {sorted(PAULIS) + ['n', 'x']} or a matrix")


def initial_state(spec, model) -> np.ndarray:
    d = model.dim
    if spec == "maximally-mixed":
        return np.eye(d, dtype=complex) / d
    if spec == "ground":
        _, v = np.linalg.eigh(model.hamiltonian.static_part())
        return np.outer(v[:, 0], v[:, 0].conj())
    rho = to_matrix(spec, "evolve.initial")
    if rho.shape != (d, d):
        raise InvalidArgumentError(f"evolve.initial has shape {rho.shape}, model dimension is {d}")
    return rho


# -- commands --------------------------------------------------------------------


def _formats(cfg):
    return set(cfg.output.formats)


def cmd_decompose(cfg, model, out: Path):
    num = cfg.numerics.build()
    f = decompose(model.hamiltonian, num.t0, num.propagator)
    hs = harmonics_for(model, f, num)
    harmonics = [
        {"alpha": h.alpha, "omega": h.omega, "q": h.q, "shifted": h.shifted, "norm": h.norm, "op": h.op}
        for h in hs
    ]
    if "json" in _formats(cfg):
        io.write_json(
            out / "decompose.json",
            {
                "period": f.period,
                "omega": f.omega,
                "t0": f.t0,
                "quasienergies": f.quasienergies,
                "floquet_basis": f.floquet_basis,
                "hbar": f.hbar,
                "monodromy": f.monodromy,
                "q_max": hs.q_max,
                "fourier_tail": hs.tail,
                "harmonics": harmonics,
            },
        )
    if "csv" in _formats(cfg):
        io.write_csv(out / "quasienergies.csv", ["index", "epsilon"], [[k, e] for k, e in enumerate(f.quasienergies)])
        z = f.floquet_basis
        io.write_csv(
            out / "basis.csv",
            ["vector", "component", *io.complex_columns("value")],
            [[k, i, *io.split_complex(z[i, k])] for k in range(f.dim) for i in range(f.dim)],
            comments=["column k of the Floquet basis is the eigenvector of quasienergy k"],
        )
        io.write_csv(out / "harmonics.csv", ["alpha", "omega", "q", "shifted", "norm"], [list(r) for r in hs.table()])
    return EXIT_OK, {"quasienergies": f.quasienergies.tolist()}


def _system(cfg, model):
    return solve(model, cfg.numerics.build())


def cmd_evolve(cfg, model, out: Path):
    sys_ = _system(cfg, model)
    f = sys_.floquet
    ev = cfg.evolve
    if ev.times is not None:
        times = np.asarray(ev.times, dtype=float)
    else:
        t_end = ev.t_end if ev.t_end is not None else 5 * f.period
        times = f.t0 + np.linspace(0.0, t_end, ev.n_times)
    rho0 = initial_state(ev.initial, model)
    if isinstance(ev.observables, dict):
        obs = {k: to_matrix(v, f"evolve.observables.{k}") for k, v in ev.observables.items()}
    else:
        obs = {k: named_observable(k, model.dim) for k in ev.observables}
    traj = sys_.evolve(rho0, times, obs)
    d = model.dim
    if "csv" in _formats(cfg):
        header = ["t", *traj.observables]
        header += [c for i in range(d) for j in range(d) for c in io.complex_columns(f"rho_{i}_{j}")]
        rows = []
        for n, t in enumerate(traj.times):
            row = [float(t), *(float(v[n]) for v in traj.observables.values())]
            row += [x for i in range(d) for j in range(d) for x in io.split_complex(traj.states[n, i, j])]
            rows.append(row)
        io.write_csv(out / "trajectory.csv", header, rows)
    if "json" in _formats(cfg):
        io.write_json(
            out / "evolve.json",
            {"times": traj.times, "observables": traj.observables, "initial": rho0, "final": traj.states[-1]},
        )
    return EXIT_OK, {"n_times": len(times)}


def cmd_steady(cfg, model, out: Path):
    sys_ = _system(cfg, model)
    f = sys_.floquet
    st = sys_.stationary_state()
    n = cfg.steady.n_samples
    times = f.t0 + f.period * np.arange(n + 1) / n
    cycle = sys_.limit_cycle(st.sigma_tilde, times)
    periodicity = fro(cycle[-1] - cycle[0])
    if "json" in _formats(cfg):
        io.write_json(
            out / "steady.json",
            {
                "sigma_tilde": st.sigma_tilde,
                "kernel_dim": st.kernel_dim,
                "unique": st.unique,
                "residual": st.residual,
                "limit_cycle": {"times": times, "states": cycle, "periodicity_residual": periodicity},
            },
        )
    if "csv" in _formats(cfg):
        d = model.dim
        header = ["t"] + [c for i in range(d) for j in range(d) for c in io.complex_columns(f"sigma_{i}_{j}")]
        rows = [[float(t)] + [x for i in range(d) for j in range(d) for x in io.split_complex(s[i, j])] for t, s in zip(times, cycle)]
        io.write_csv(out / "limit_cycle.csv", header, rows)
    return EXIT_OK, {"kernel_dim": st.kernel_dim, "populations": np.real(np.diag(st.sigma_tilde)).tolist()}


def cmd_verify(cfg, model, out: Path):
    num = cfg.numerics.build()
    f = decompose(model.hamiltonian, num.t0, num.propagator)
    sys_ = assemble(model, f, num)
    report = verify_all(f, sys_.harmonics, sys_.generator, cfg.seed, dict(model.couplings), model.baths)
    io.write_json(out / "verify.json", report.to_dict())
    return (EXIT_OK if report.passed else EXIT_VERIFY), {"passed": report.passed, "failed": report.failed()}


HANDLERS = {"decompose": cmd_decompose, "evolve": cmd_evolve, "steady": cmd_steady, "verify": cmd_verify}


# -- execution ---------------------------------------------------------------------


def _pointer(err: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in err.errors())


def classify(exc: BaseException):
    """``(exit status, message, diagnostics)`` for an exception raised by a run."""
    if isinstance(exc, ValidationError):
        return EXIT_INVALID, f"invalid configuration: {_pointer(exc)}", {}
    if isinstance(exc, OutOfRangeError):
        return EXIT_INVALID, str(exc), {"points": exc.points}
    if isinstance(exc, ModelRejectionError):
        return EXIT_INVALID, str(exc), {"frequency": exc.frequency}
    if isinstance(exc, InvalidArgumentError):
        return EXIT_INVALID, str(exc), {}
    if isinstance(exc, NumericFailure):
        return EXIT_NUMERIC, str(exc), exc.diagnostics
    if isinstance(exc, DegeneracyAmbiguityError):
        return EXIT_NUMERIC, str(exc), {"triples": exc.triples}
    if isinstance(exc, FlqError):
        return EXIT_NUMERIC, str(exc), {}
    raise exc


def run_point(raw: dict, command: str, out: Path, base: Path):
    """Validate and run one command; returns ``(status, summary)``. Never raises for flq errors."""
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = RunConfig.model_validate(raw)
        model = build_model(cfg, base)
        with threadpool_limits(limits=1):
            return HANDLERS[command](cfg, model, out)
    except (ValidationError, FlqError) as exc:
        status, msg, diag = classify(exc)
        io.write_json(out / "error.json", {"status": status, "message": msg, "diagnostics": diag})
        return status, {"error": msg}


def _point_task(args):
    raw, command, out, base = args
    return run_point(raw, command, Path(out), Path(base))


def worker_count(flag, cfg_value) -> int:
    if flag is not None:
        return int(flag)
    if cfg_value is not None:
        return int(cfg_value)
    env = os.environ.get("FLQ_NUM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidArgumentError(f"FLQ_NUM_WORKERS must be an integer, got {env!r}") from exc
    return 1


def run_sweep(raw: dict, out: Path, base: Path, workers: int):
    cfg = RunConfig.model_validate(raw)
    axes = cfg.sweep.axes
    if not axes:
        raise InvalidArgumentError("sweep.axes is empty")
    grid = list(itertools.product(*(a.values for a in axes)))
    tasks = []
    for i, values in enumerate(grid):
        point = io.to_jsonable(raw)
        point.pop("sweep", None)
        for axis, v in zip(axes, values):
            set_path(point, axis.path, v)
        tasks.append((point, cfg.sweep.command, str(out / f"point_{i:04d}"), str(base)))
    out.mkdir(parents=True, exist_ok=True)
    if workers <= 1:
        results = [_point_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks))
    points = [
        {
            "index": i,
            "values": {a.path: v for a, v in zip(axes, values)},
            "directory": f"point_{i:04d}",
            "status": status,
            "summary": summary,
        }
        for i, (values, (status, summary)) in enumerate(zip(grid, results))
    ]
    io.write_json(out / "manifest.json", {"command": cfg.sweep.command, "axes": [a.path for a in axes], "points": points})
    statuses = {p["status"] for p in points}
    for code in (EXIT_INVALID, EXIT_NUMERIC, EXIT_VERIFY):
        if code in statuses:
            return code, {"points": len(points)}
    return EXIT_OK, {"points": len(points)}


def build_parser():
    p = argparse.ArgumentParser(prog="flq", description="Floquet-Lindblad dynamics of periodically driven open systems")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry (dotted path)")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--seed", type=int, help="random seed (overrides seed)")
    p.add_argument("--workers", type=int, help="sweep worker count (default: sweep.workers, FLQ_NUM_WORKERS, 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = Path(args.config).resolve().parent
    try:
        raw = with_overrides(load_raw(args.config), args.set)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.out is not None:
            raw.setdefault("output", {})["directory"] = args.out
        cfg = RunConfig.model_validate(raw)
        if args.workers is not None and args.workers < 1:
            raise InvalidArgumentError("--workers must be positive")
    except (ValidationError, FlqError) as exc:
        status, msg, _ = classify(exc)
        print(f"flq: {msg}", file=sys.stderr)
        return status
    out = Path(cfg.output.directory)
    if not out.is_absolute() and args.out is None:
        out = base / out
    if args.command == "sweep":
        try:
            status, summary = run_sweep(raw, out, base, worker_count(args.workers, cfg.sweep.workers))
        except (ValidationError, FlqError) as exc:
            status, msg, _ = classify(exc)
            print(f"flq: {msg}", file=sys.stderr)
            return status
    else:
        status, summary = run_point(raw, args.command, out, base)
    if "error" in summary:
        print(f"flq: {summary['error']}", file=sys.stderr)
    else:
        print(io.dumps({"command": args.command, "status": status, **summary}).strip())
    return status


if __name__ == "__main__":
    sys.exit(main())
