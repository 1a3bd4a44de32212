"""Experiment drivers behind the CLI subcommands.

Every ``run_*`` driver takes a config dict (raw or already normalized) and an
output directory, writes its files there and returns a small result object.
File contents depend only on the config, so reruns are byte-identical apart
from the timestamps in ``manifest.json``.
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__, analytic
from ..errors import ConfigError, DomainError
from ..graddyn import FreezeMask, TrainSchedule, integrate
from ..suffstats import GWeighted, Plain, aggregate
from . import config as cfgmod
from .data import generate_data, initial_model, time_signals

FLOAT_FMT = "{:.17g}"


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT.format(float(x))
    return str(x)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path, obj):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


@dataclass
class RunResult:
    status: str = "completed"
    files: list = field(default_factory=list)
    trajectory: object = None
    report: dict = None
    table: list = None


def write_manifest(cfg, out_dir, started, status, files, command):
    manifest = {
        "command": command,
        "name": cfg["name"],
        "config_hash": cfgmod.config_hash(cfg),
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
        "status": status,
        "seed": cfg["data"]["seed"],
        "files": sorted(os.path.relpath(f, out_dir) for f in files),
    }
    return write_json(os.path.join(out_dir, "manifest.json"), manifest)


# ---------------------------------------------------------------- gen

def run_gen(cfg, out_dir):
    started = _now()
    cfg = cfgmod.normalize(cfg)
    U, Y = generate_data(cfg["data"])
    u, y = time_signals(cfg["data"])
    files = [
        write_csv(os.path.join(out_dir, "data.csv"), ["k", "U_re", "U_im", "Y_re", "Y_im"],
                  [(k, U[k].real, U[k].imag, Y[k].real, Y[k].imag) for k in range(U.size)]),
        write_csv(os.path.join(out_dir, "signals.csv"), ["t", "u", "y"],
                  [(t, u[t], y[t]) for t in range(u.size)]),
    ]
    plain = aggregate(U, Y, Plain())
    stats = {"plain": {"sigma": [plain.sigma.real, plain.sigma.imag], "eta": plain.eta.real}}
    a0 = cfg["model"]["init"][0]["a0"]
    if len(set(a0)) == 1:
        gw = aggregate(U, Y, GWeighted(a0[0]))
        stats["gweighted"] = {"a": a0[0], "sigma": [gw.sigma.real, gw.sigma.imag], "eta": gw.eta.real}
    files.append(write_json(os.path.join(out_dir, "stats.json"), stats))
    files.append(write_manifest(cfg, out_dir, started, "completed", files, "gen"))
    return RunResult(files=files)


# ---------------------------------------------------------------- train

def _schedule(cfg):
    s = cfg["schedule"]
    return TrainSchedule(s["tau"], s["dt"], s["steps"], s["record_every"], s["integrator"])


def _masks(cfg):
    return [FreezeMask(**m) for m in cfg["model"]["mask"]]


def train(cfg):
    U, Y = generate_data(cfg["data"])
    model = initial_model(cfg)
    traj = integrate(model, U, Y, _masks(cfg), _schedule(cfg),
                     record_response=cfg["outputs"]["record_response"])
    return traj, U, Y


def trajectory_rows(traj):
    for r in traj.records:
        yield [r.step, r.t, r.loss_freq, r.lam, *r.params.tolist()]


def write_trajectory(traj, out_dir, formats, record_response=False):
    header = ["step", "t", "loss_freq", "lambda", *traj.param_names()]
    files = [write_csv(os.path.join(out_dir, "trajectory.csv"), header, trajectory_rows(traj))]
    if "json" in formats:
        files.append(write_json(os.path.join(out_dir, "trajectory.json"), {
            "status": traj.status,
            "diverged_step": traj.diverged_step,
            "columns": header,
            "rows": [list(map(float, row)) for row in trajectory_rows(traj)],
        }))
    if record_response and traj.records:
        rows = ([r.step, k, h.real, h.imag] for r in traj.records for k, h in enumerate(r.H))
        files.append(write_csv(os.path.join(out_dir, "response.csv"), ["step", "k", "H_re", "H_im"], rows))
    return files


def run_train(cfg, out_dir):
    started = _now()
    cfg = cfgmod.normalize(cfg)
    traj, _, _ = train(cfg)
    files = write_trajectory(traj, out_dir, cfg["outputs"]["formats"], cfg["outputs"]["record_response"])
    files.append(write_manifest(cfg, out_dir, started, traj.status, files, "train"))
    return RunResult(traj.status, files, traj)


# ---------------------------------------------------------------- analytic

def _symmetric(values, path):
    if len(set(values)) != 1:
        raise ConfigError(path, "closed forms need identical values across latent dimensions")
    return values[0]


def _analytic_section(cfg):
    return cfg["analytic"] if cfg["analytic"] is not None else dict(cfgmod.ANALYTIC_DEFAULTS)


def scalar_setup(cfg, U, Y, N=1):
    """Setup for the balanced product formulas (G-weighted statistics)."""
    an = _analytic_section(cfg)
    init = cfg["model"]["init"][0]
    a = _symmetric(init["a0"], "model.init.a0")
    sigma, eta = an["sigma"], an["eta"]
    if sigma is None or eta is None:
        stats = aggregate(U, Y, GWeighted(a))
        sigma = stats.sigma_real if sigma is None else sigma
        eta = stats.eta_real if eta is None else eta
    lam0 = an["lambda0"]
    if lam0 is None:
        lam0 = _symmetric(init["c0"], "model.init.c0") * _symmetric(init["b0"], "model.init.b0")
    return analytic.ReducedScalarSetup(sigma * an["sigma_scale"], eta, cfg["schedule"]["tau"], lam0, N)


def fixed_ab_setup(cfg, U, Y):
    """Setup for learning C (or A) with B = 1 fixed (plain statistics)."""
    an = _analytic_section(cfg)
    init = cfg["model"]["init"][0]
    if _symmetric(init["b0"], "model.init.b0") != 1.0:
        raise ConfigError("model.init.b0", "fixed-(A, B) formulas assume b0 = 1")
    sigma, eta = an["sigma"], an["eta"]
    if sigma is None or eta is None:
        if cfg["data"]["L"] != 1:
            raise ConfigError("data.L", "fixed-(A, B) formulas describe a single bin; use L = 1 or give sigma and eta")
        stats = aggregate(U, Y, Plain())
        sigma = stats.sigma_real if sigma is None else sigma
        eta = stats.eta_real if eta is None else eta
    return analytic.FixedABSetup(
        _symmetric(init["a0"], "model.init.a0"), _symmetric(init["c0"], "model.init.c0"),
        sigma * an["sigma_scale"], eta, cfg["schedule"]["tau"], cfg["model"]["N"],
    )


def _grid(t_max, num):
    return np.linspace(0.0, t_max, num)


def a_implicit_curve(setup, num):
    """(t, a) pairs from the implicit t(a) formula along the reachable path."""
    a_star = setup.a_limit()
    heading = np.sign(setup.c0 * setup.sigma * (a_star - setup.a))
    if heading == 0:
        raise DomainError("a is stationary for this setup")
    toward = heading == np.sign(a_star - setup.a)
    end = a_star if toward and abs(a_star) < 1 else float(heading)
    a_grid = setup.a + (end - setup.a) * np.linspace(0.0, 0.999, num)
    t = np.array([analytic.time_to_a(af, setup) for af in a_grid])
    return t, a_grid


def analytic_curves(cfg, U, Y):
    """Map of curve name -> (t, values) for the configured formula."""
    an = _analytic_section(cfg)
    formula, num = an["formula"], an["num"]
    if formula == "lambda_scalar":
        s = scalar_setup(cfg, U, Y, 1)
        t = _grid(an["t_max"] or 10 * analytic.time_constant_scalar(s), num)
        return {"lambda_scalar": (t, np.atleast_1d(analytic.lambda_scalar(t, s)))}
    if formula == "lambda_ndim":
        Ns = an["N_values"] or [cfg["model"]["N"]]
        base = scalar_setup(cfg, U, Y, 1)
        t = _grid(an["t_max"] or 10 * analytic.time_constant_scalar(base), num)
        out = {}
        for N in Ns:
            s = scalar_setup(cfg, U, Y, N)
            out[f"lambda_ndim_N{N}"] = (t, np.atleast_1d(analytic.lambda_ndim(t, s)))
        return out
    if formula == "c_of_t":
        s = fixed_ab_setup(cfg, U, Y)
        t = _grid(an["t_max"] or 10 / s.c_rate, num)
        return {"c_of_t": (t, np.atleast_1d(analytic.c_of_t(t, s)))}
    if formula == "a_implicit":
        s = fixed_ab_setup(cfg, U, Y)
        return {"a_implicit": a_implicit_curve(s, num)}
    raise ConfigError("analytic.formula", f"unknown formula {formula!r}")


def run_analytic(cfg, out_dir, formula=None):
    started = _now()
    if formula is not None:
        cfg = cfgmod.set_path(cfg, "analytic.formula", formula)
    cfg = cfgmod.normalize(cfg)
    U, Y = generate_data(cfg["data"])
    files = []
    for name, (t, v) in analytic_curves(cfg, U, Y).items():
        files.append(write_csv(os.path.join(out_dir, "curves", f"{name}.csv"), ["t", "value"], zip(t, v)))
    files.append(write_manifest(cfg, out_dir, started, "completed", files, "analytic"))
    return RunResult(files=files)


# ---------------------------------------------------------------- compare

def compare_curves(cfg, traj, U, Y):
    """Empirical and closed-form curves on the trajectory's record times."""
    an = _analytic_section(cfg)
    formula = an["formula"]
    t = traj.t
    notes = []
    N, K = cfg["model"]["N"], cfg["model"]["K"]
    if K != 1:
        raise ConfigError("model.K", "closed-form comparisons cover single-layer models")
    if formula == "lambda_scalar":
        if N != 1:
            raise ConfigError("model.N", "lambda_scalar compares N = 1 runs; use lambda_ndim")
        s = scalar_setup(cfg, U, Y, 1)
        emp, ref = traj.lam, analytic.lambda_scalar(t, s)
        quantity = "lambda"
    elif formula == "lambda_ndim":
        s = scalar_setup(cfg, U, Y, N)
        emp, ref = traj.lam / s.limit, analytic.lambda_ndim(t, s) / s.limit
        quantity = "lambda / (sigma/eta)"
        notes.append("normalized curves: empirical sum_i c_i b_i against the printed N-dim formula")
    elif formula == "c_of_t":
        s = fixed_ab_setup(cfg, U, Y)
        emp, ref = traj.params[:, 2 * N], analytic.c_of_t(t, s)
        quantity = "c_0"
        if N > 1:
            notes.append("per-dimension gradients give rate N eta/(1-a)^2, the formula assumes a shared c")
    elif formula == "a_implicit":
        s = fixed_ab_setup(cfg, U, Y)
        t_curve, a_curve = a_implicit_curve(s, an["num"])
        keep = t <= t_curve[-1]
        t, emp = t[keep], traj.params[keep, 0]
        ref = np.interp(t, t_curve, a_curve)
        quantity = "a_0"
        notes.append("closed form gives t(a); resampled onto record times by linear interpolation")
    else:
        raise ConfigError("analytic.formula", f"unknown formula {formula!r}")
    return t, np.asarray(emp, dtype=float), np.atleast_1d(np.asarray(ref, dtype=float)), quantity, notes


def compare(cfg, traj, U, Y):
    t, emp, ref, quantity, notes = compare_curves(cfg, traj, U, Y)
    dev = emp - ref
    tol = cfg["compare"]["tolerance"]
    sup = float(np.max(np.abs(dev))) if dev.size else float("nan")
    report = {
        "formula": _analytic_section(cfg)["formula"],
        "quantity": quantity,
        "points": int(t.size),
        "sup_norm": sup,
        "rms": float(np.sqrt(np.mean(dev ** 2))) if dev.size else float("nan"),
        "tolerance": tol,
        "within_tolerance": bool(sup <= tol),
        "verdict": "match" if sup <= tol else "mismatch",
        "trajectory_status": traj.status,
        "notes": notes,
    }
    return report, (t, emp, ref)


def run_compare(cfg, out_dir):
    started = _now()
    cfg = cfgmod.normalize(cfg)
    traj, U, Y = train(cfg)
    files = write_trajectory(traj, out_dir, cfg["outputs"]["formats"], cfg["outputs"]["record_response"])
    report, (t, emp, ref) = compare(cfg, traj, U, Y)
    files.append(write_json(os.path.join(out_dir, "report.json"), report))
    if cfg["outputs"]["emit_plot_data"]:
        files.append(write_csv(os.path.join(out_dir, "curves", "compare.csv"),
                               ["t", "empirical", "analytic"], zip(t, emp, ref)))
    files.append(write_manifest(cfg, out_dir, started, traj.status, files, "compare"))
    return RunResult(traj.status, files, traj, report)


# ---------------------------------------------------------------- sweep

SWEEP_COLUMNS = ["index", "param", "value", "status", "steps", "final_t", "final_loss", "final_lambda",
                 "lambda_limit", "limit_source", "t_alpha", "compare_sup", "compare_rms",
                 "ref_deviation", "error"]


def _lambda_limit(cfg, traj, U, Y):
    masks = cfg["model"]["mask"]
    a0 = cfg["model"]["init"][0]["a0"]
    if cfg["model"]["K"] == 1 and not masks[0]["learn_a"] and len(set(a0)) == 1:
        return aggregate(U, Y, GWeighted(a0[0])).ratio, "sigma/eta"
    return float(traj.lam[-1]), "final"


def _sweep_child(job):
    index, param, value, raw, reference, run_dir, alpha = job
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(index=index, param=param, value=json.dumps(value))
    try:
        child_raw = cfgmod.set_path(raw, param, value)
        cfg = cfgmod.normalize(child_raw)
        traj, U, Y = train(cfg)
        write_trajectory(traj, run_dir, ["csv"])
        limit, source = _lambda_limit(cfg, traj, U, Y)
        row.update(status=traj.status, steps=int(traj.steps[-1]), final_t=float(traj.t[-1]),
                   final_loss=float(traj.loss[-1]), final_lambda=float(traj.lam[-1]),
                   lambda_limit=limit, limit_source=source,
                   t_alpha=analytic.time_to_fraction(traj.t, traj.lam, limit, alpha))
        if cfg["analytic"] is not None:
            report, _ = compare(cfg, traj, U, Y)
            row.update(compare_sup=report["sup_norm"], compare_rms=report["rms"])
        if reference:
            ref_raw = child_raw
            for path, v in sorted(reference.items()):
                ref_raw = cfgmod.set_path(ref_raw, path, v)
            ref_traj, _, _ = train(cfgmod.normalize(ref_raw))
            ref_lam = np.interp(traj.t, ref_traj.t, ref_traj.lam)
            row["ref_deviation"] = float(np.max(np.abs(traj.lam - ref_lam)))
    except (ConfigError, DomainError, ValueError) as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row


def run_sweep(raw, out_dir, jobs=None):
    """One independent run per sweep value, merged into ``sweep.csv`` in value order.

    ``raw`` is the config as written (not normalized) so that a swept value
    such as ``model.N`` re-derives everything that depends on it.
    """
    started = _now()
    cfg = cfgmod.normalize(raw)
    sw = cfg["sweep"]
    if sw is None:
        raise ConfigError("sweep", "config has no sweep section")
    base = {k: v for k, v in raw.items() if k != "sweep"}
    jobs_list = [
        (i, sw["param"], value, base, sw["reference"], os.path.join(out_dir, "runs", f"{i:03d}"), sw["alpha"])
        for i, value in enumerate(sw["values"])
    ]
    workers = jobs or sw["jobs"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_child, jobs_list))
    else:
        rows = [_sweep_child(job) for job in jobs_list]
    rows.sort(key=lambda r: r["index"])
    files = [write_csv(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS,
                       ([r[c] for c in SWEEP_COLUMNS] for r in rows))]
    files += [os.path.join(out_dir, "runs", f"{i:03d}", "trajectory.csv")
              for i, r in enumerate(rows) if r["status"] != "error"]
    if "json" in cfg["outputs"]["formats"]:
        files.append(write_json(os.path.join(out_dir, "sweep.json"), rows))
    status = "diverged" if any(r["status"] == "diverged" for r in rows) else "completed"
    files.append(write_manifest(cfg, out_dir, started, status, files, "sweep"))
    return RunResult(status, files, table=rows)
