"""Batch driver: config-driven experiments with machine-readable reports.

    isomono <command> --config cfg.json [--out DIR] [--seed N] [--ode-tol T]

Commands: schlesinger-audit, gaudin-run, monodromy, spectral-curve, wcheck.
Each run writes a JSON report (and optionally a CSV invariant series) and
exits 0 when every configured threshold is met, 1 on a threshold failure,
2 on a config error, 3 on a numerical abort.  Reports are byte-identical
across runs with equal configs and seeds, except for the timestamp field.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import hitchin, isoflow, monodromy, wstructures
from .connection import (FuchsianConnection, curve_probe_defect, moduli_dimension,
                         random_connection, spectral_curve)
from .isoflow import PoleCollisionError, SchlesingerState
from .monodromy import TransportError
from .serialize import (ConfigError, decode_complex, decode_connection,
                        encode_complex, monodromy_report)

__all__ = ["main", "run_config"]

COMMANDS = ("schlesinger-audit", "gaudin-run", "monodromy", "spectral-curve",
            "wcheck")

DEFAULT_THRESHOLDS = {
    "schlesinger-audit": {"invariant_drift": 1e-6, "eigen_drift": 1e-9,
                          "sum_p_drift": 1e-10},
    "gaudin-run": {"spectral_drift": 1e-8, "bracket_max": 1e-11,
                   "energy_drift": 1e-9},
    "monodromy": {"product_defect": 1e-7, "det_defect": 1e-8},
    "spectral-curve": {"probe_rel_err": 1e-9},
    "wcheck": {"structural_rows": 1e-11, "reduction_chain": 1e-12,
               "map_residual": 1e-12},
}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _need(cfg: dict, key: str, kind, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}", "missing required field")
    val = cfg[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"{path}.{key}", "expected a number")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigError(f"{path}.{key}", "expected an integer")
        return val
    if not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}")
    return val


def _load_connection(cfg: dict, path: str = "") -> FuchsianConnection:
    where = path or "config"
    if "connection" in cfg:
        return decode_connection(cfg["connection"], f"{where}.connection")
    if "random_connection" in cfg:
        rc = cfg["random_connection"]
        rpath = f"{where}.random_connection"
        if not isinstance(rc, dict):
            raise ConfigError(rpath, "expected an object")
        n = _need(rc, "n_points", int, rpath)
        dim = _need(rc, "matrix_dim", int, rpath)
        seed = _need(rc, "seed", int, rpath)
        kappa = decode_complex(rc.get("kappa", [1.0, 0.0]), f"{rpath}.kappa")
        return random_connection(n, dim, seed=seed, kappa=kappa)
    raise ConfigError(f"{where}.connection",
                      "need either 'connection' or 'random_connection'")


def _thresholds(cfg: dict, command: str) -> dict:
    merged = dict(DEFAULT_THRESHOLDS[command])
    user = cfg.get("thresholds", {})
    if not isinstance(user, dict):
        raise ConfigError("config.thresholds", "expected an object")
    for key, val in user.items():
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"config.thresholds.{key}", "expected a number")
        merged[key] = float(val)
    return merged


def _check(results: dict, thresholds: dict, greater: tuple = ()) -> dict:
    """Compare results to thresholds; keys in ``greater`` must exceed."""
    verdict = {}
    for key, bound in thresholds.items():
        if key not in results:
            continue
        if key in greater:
            verdict[key] = bool(results[key] > bound)
        else:
            verdict[key] = bool(results[key] < bound)
    return verdict


# ---------------------------------------------------------------------------
# command handlers (each returns results, thresholds, verdicts, extras)
# ---------------------------------------------------------------------------

def _run_schlesinger_audit(cfg: dict, ode_tol: float | None):
    conn = _load_connection(cfg)
    flow = _need(cfg, "flow", dict, "config")
    direction = _need(flow, "direction", int, "config.flow")
    t_end = decode_complex(_need(flow, "t_end", list, "config.flow"),
                           "config.flow.t_end")
    tol = ode_tol if ode_tol is not None else float(flow.get("ode_tol", 1e-10))
    word_len = int(cfg.get("word_max_len", 2))
    state = SchlesingerState.from_connection(conn)

    trajectory = isoflow.integrate_flow(state, direction, t_end, tol=tol)
    audit = isoflow.isomonodromy_audit(state, direction, t_end, ode_tol=tol,
                                       word_max_len=word_len,
                                       trajectory=trajectory)
    results = audit.to_dict()
    results["flow_steps"] = trajectory.stats["steps"]
    if cfg.get("control", False):
        control = isoflow.isomonodromy_audit(state, direction, t_end,
                                             ode_tol=tol, word_max_len=3,
                                             sign_flip=True)
        results["control_drift"] = control.invariant_drift
    thresholds = _thresholds(cfg, "schlesinger-audit")
    verdicts = _check(results, thresholds, greater=("control_min_drift",))
    if "control_min_drift" in thresholds and "control_drift" in results:
        verdicts["control_min_drift"] = bool(
            results["control_drift"] > thresholds["control_min_drift"])
    series = _invariant_series(trajectory, tol) if cfg.get("csv_series") else None
    return results, thresholds, verdicts, {"series": series}


def _invariant_series(trajectory, tol: float) -> list[list]:
    """Word invariants and eigenvalue drifts along a flow, for plotting."""
    state0 = trajectory.initial
    n = state0.n_sites
    conn0 = state0.connection()
    base = monodromy.default_base_point(
        np.concatenate([s.positions for s in trajectory.states]))
    order = monodromy.standard_product_order(conn0.points, base)
    labels = monodromy.word_labels(n, 2)
    header = ["t_re", "t_im"]
    for lab in labels:
        header += [f"{lab}_re", f"{lab}_im"]
    header += [f"eigen_drift_{a + 1}" for a in range(n)]
    rows: list[list] = [header]
    for s, state in zip(trajectory.parameters, trajectory.states):
        rep = monodromy.monodromy_rep(state.connection(), base_point=base,
                                      tol=tol, product_order=order)
        inv = monodromy.word_invariants(rep, 2)
        t_rel = state.times - state0.times
        t_cur = complex(t_rel[np.argmax(np.abs(t_rel))]) if n else 0j
        row = [t_cur.real, t_cur.imag]
        for v in inv:
            row += [v.real, v.imag]
        row += [p.spectrum_drift() for p in state.residues]
        rows.append(row)
    return rows


def _run_gaudin(cfg: dict, ode_tol: float | None):
    conn = _load_connection(cfg)
    flow = _need(cfg, "flow", dict, "config")
    direction = _need(flow, "direction", int, "config.flow")
    t_end = decode_complex(_need(flow, "t_end", list, "config.flow"),
                           "config.flow.t_end")
    tol = ode_tol if ode_tol is not None else float(flow.get("ode_tol", 1e-10))
    state = hitchin.AutonomousState(positions=conn.points, residues=conn.residues)

    trajectory = hitchin.autonomous_flow(state, direction, t_end, tol=tol)
    n = state.n_sites
    bracket = max(hitchin.commutation_check(state, a, b)
                  for a in range(n) for b in range(a + 1, n))
    energy = max(abs(hitchin.gaudin_hamiltonian(trajectory.final, a)
                     - hitchin.gaudin_hamiltonian(trajectory.initial, a))
                 for a in range(n))
    results = {
        "spectral_drift": hitchin.spectral_conservation_audit(trajectory),
        "bracket_max": bracket,
        "energy_drift": energy,
        "flow_steps": trajectory.stats["steps"],
    }
    thresholds = _thresholds(cfg, "gaudin-run")
    return results, thresholds, _check(results, thresholds), {}


def _run_monodromy(cfg: dict, ode_tol: float | None):
    conn = _load_connection(cfg)
    tol = ode_tol if ode_tol is not None else float(cfg.get("tol", 1e-10))
    base = None
    if "base_point" in cfg:
        base = decode_complex(cfg["base_point"], "config.base_point")
    word_len = int(cfg.get("word_max_len", 2))
    rep = monodromy.monodromy_rep(conn, base_point=base, tol=tol)
    report = monodromy_report(rep, word_len)
    results = {
        "product_defect": report["product_defect"],
        "det_defect": float(np.abs(np.linalg.det(rep.matrices) - 1.0).max()),
    }
    thresholds = _thresholds(cfg, "monodromy")
    return results, thresholds, _check(results, thresholds), {"monodromy": report}


def _run_spectral_curve(cfg: dict, ode_tol: float | None):
    conn = _load_connection(cfg)
    data = spectral_curve(conn)
    parts = {
        str(k): [[encode_complex(c) for c in data.principal_parts[k][a]]
                 for a in range(conn.n_points)]
        for k in range(2, conn.matrix_dim + 1)
    }
    results = {"probe_rel_err": curve_probe_defect(conn, data)}
    thresholds = _thresholds(cfg, "spectral-curve")
    extras = {
        "principal_parts": parts,
        "moduli_dimensions": {
            "quadratic": moduli_dimension(0, conn.n_points, 2),
            "cubic": moduli_dimension(0, conn.n_points, 3),
        },
    }
    return results, thresholds, _check(results, thresholds), extras


def _run_wcheck(cfg: dict, ode_tol: float | None):
    seed = _need(cfg, "seed", int, "config")
    samples = int(cfg.get("samples", 100))
    dim = int(cfg.get("matrix_dim", 2))
    kappa = decode_complex(cfg.get("kappa", [1.0, 0.0]), "config.kappa")
    levels = cfg.get("levels", [2, 3])
    if not isinstance(levels, list) or not all(l in (2, 3) for l in levels):
        raise ConfigError("config.levels", "expected a list drawn from [2, 3]")

    results: dict = {}
    structural = 0.0
    for level in levels:
        d = wstructures.structural_sweep(level, samples, seed=seed,
                                         matrix_dim=dim, kappa=kappa)
        results[f"structural_rows_level{level}"] = d
        structural = max(structural, d)
    results["structural_rows"] = structural
    chain = wstructures.reduction_chain_defects(max(samples // 5, 5),
                                                seed=seed, kappa=kappa)
    results.update(chain)
    results["reduction_chain"] = max(chain.values())
    results["map_residual"] = wstructures.map_residual_sweep(
        max(samples // 5, 5), seed=seed, kappa=kappa)

    extras = {}
    if "pole_metadata" in cfg:
        pm = cfg["pole_metadata"]
        ppath = "config.pole_metadata"
        if not isinstance(pm, dict):
            raise ConfigError(ppath, "expected an object")
        level = _need(pm, "level", int, ppath)
        pk = decode_complex(pm.get("kappa", [1.0, 0.0]), f"{ppath}.kappa")
        spectra = _need(pm, "orbit_spectra", list, ppath)
        spectra = [[decode_complex(v, f"{ppath}.orbit_spectra[{i}][{j}]")
                    for j, v in enumerate(row)] for i, row in enumerate(spectra)]
        declared_raw = _need(pm, "declared", dict, ppath)
        declared = {key: [decode_complex(v, f"{ppath}.declared.{key}[{i}]")
                          for i, v in enumerate(vals)]
                    for key, vals in declared_raw.items()}
        try:
            defects = wstructures.declared_pole_defects(spectra, declared,
                                                        level, pk)
        except ValueError as exc:
            raise ConfigError(ppath, str(exc)) from exc
        results["pole_metadata_defect"] = max(max(v) for v in defects.values())
        extras["pole_metadata_defects"] = {k: list(map(float, v))
                                           for k, v in defects.items()}
    thresholds = _thresholds(cfg, "wcheck")
    if "pole_metadata" in cfg:
        thresholds.setdefault("pole_metadata_defect",
                              float(cfg["pole_metadata"].get("threshold", 1e-12)))
    return results, thresholds, _check(results, thresholds), extras


_HANDLERS = {
    "schlesinger-audit": _run_schlesinger_audit,
    "gaudin-run": _run_gaudin,
    "monodromy": _run_monodromy,
    "spectral-curve": _run_spectral_curve,
    "wcheck": _run_wcheck,
}


# ---------------------------------------------------------------------------
# report writing and entry point
# ---------------------------------------------------------------------------

def run_config(command: str, cfg: dict, out_dir: Path,
               seed_override: int | None = None,
               ode_tol_override: float | None = None) -> int:
    """Execute one experiment; returns the process exit code."""
    if command not in _HANDLERS:
        raise ConfigError("command", f"unknown command {command!r}")
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    cfg = dict(cfg)
    if seed_override is not None:
        if "random_connection" in cfg:
            cfg["random_connection"] = dict(cfg["random_connection"],
                                            seed=seed_override)
        cfg["seed"] = seed_override

    results, thresholds, verdicts, extras = _HANDLERS[command](cfg, ode_tol_override)
    passed = all(verdicts.values()) if verdicts else True
    report = {
        "command": command,
        "results": _jsonable(results),
        "thresholds": thresholds,
        "verdicts": verdicts,
        "pass": passed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    for key, val in extras.items():
        if key != "series" and val is not None:
            report[key] = val

    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / cfg.get("output", f"{command}-report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    series = extras.get("series")
    if series:
        with open(report_path.with_suffix(".csv"), "w", newline="") as fh:
            csv.writer(fh).writerows(series)
    print(f"{command}: {'pass' if passed else 'FAIL'} -> {report_path}")
    for key, ok in sorted(verdicts.items()):
        print(f"  {key}: {results.get(key, float('nan')):.3e} "
              f"[{'ok' if ok else 'fail'}]")
    return 0 if passed else 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return encode_complex(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isomono",
        description="Config-driven audits of residue flows, monodromy and "
                    "W-structure identities.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="report output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--ode-tol", type=float, default=None,
                        help="override the integrator tolerance")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        print(json.dumps({"error": {"path": "config",
                                    "message": f"no such file: {args.config}"}}),
              file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(json.dumps({"error": {"path": "config",
                                    "message": f"invalid JSON: {exc}"}}),
              file=sys.stderr)
        return 2

    try:
        return run_config(args.command, cfg, Path(args.out),
                          seed_override=args.seed,
                          ode_tol_override=args.ode_tol)
    except ConfigError as exc:
        print(json.dumps({"error": {"path": exc.path, "message": str(exc)}}),
              file=sys.stderr)
        return 2
    except (PoleCollisionError, TransportError, ArithmeticError,
            ZeroDivisionError) as exc:
        diag = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if isinstance(exc, PoleCollisionError):
            diag["error"]["pair"] = list(exc.pair)
            diag["error"]["parameter"] = encode_complex(exc.parameter)
        if isinstance(exc, TransportError):
            diag["error"]["piece_index"] = exc.piece_index
        print(json.dumps(diag), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
