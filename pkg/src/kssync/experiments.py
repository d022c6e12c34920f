"""Scenario drivers and deterministic CSV emission.

A run has three phases: the parent builds everything replicates share (the
burned-in drive trajectory, clean grid samples, per-order least-squares
operators), replicates execute -- serially or in a fork-based pool -- each
owning its rng and writing its own trace file, and the parent aggregates
per-cell summary rows.  Seeds derive from base_seed + global run index, so
outputs are byte-identical for equal (config, seed) regardless of the worker
count.
"""

from __future__ import annotations

import concurrent.futures
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, validate_config
from .errors import ConfigError, DivergenceError
from .master import burn_in_init, simulate_master
from .metrics import RunTrace, cost_C, error_coeffs, tail_average
from .observation import build_setup, calibrate_sigma, uniform_grid
from .slave import adaptive_step, init_slave_state, scalar_coupling
from .spectral import (
    DomainConfig,
    ModelParams,
    parseval_power,
    synthesize_field,
    zero_coeffs,
)
from .ubkf import default_filter_state, run_ubkf

__all__ = [
    "TRACE_HEADER",
    "SUMMARY_HEADER",
    "FIELD_HEADER",
    "TAIL_FRACTION",
    "control_reference",
    "run_scenario",
]

TRACE_HEADER = "t,e2_norm,cost,alpha_hat,beta_hat,gamma_hat,err2_alpha,err2_beta,err2_gamma"
SUMMARY_HEADER = ("axis_value,run_id,tail_e2_mean,tail_e2_std,"
                  "final_err2_alpha,final_err2_beta,final_err2_gamma,status")
FIELD_HEADER = "t,x,u,v,err"

# fraction of the run over which tail statistics are averaged
TAIL_FRACTION = 0.2

# floor for the filter's measurement variance in noiseless comparison runs
_R_FLOOR_SIGMA = 1e-6


def control_reference(t: float, x: float, target: float, ramp_T: float) -> float:
    """Spatially uniform reference: target scaled by the smoothstep
    3r^2 - 2r^3 of r = t/ramp_T, clamped to [0, 1]."""
    if ramp_T <= 0:
        raise ConfigError("ramp_T must be positive")
    r = t / ramp_T
    r = 0.0 if r < 0.0 else (1.0 if r > 1.0 else r)
    return target * (3.0 * r * r - 2.0 * r * r * r)


def _fmt(v) -> str:
    return repr(float(v))


def _stored_indices(n: int, stride: int) -> list[int]:
    idx = list(range(0, n + 1, stride))
    if idx[-1] != n:
        idx.append(n)
    return idx


def _safe_e2(a_row, b) -> float:
    """Normalized error power; inf when the drive row has no power but the
    error does (e.g. a reference that starts from the zero field)."""
    e = error_coeffs(a_row, b)
    pe = parseval_power(e)
    pa = parseval_power(a_row)
    if pa == 0.0:
        return 0.0 if pe == 0.0 else float("inf")
    return pe / pa


def _fold_batch(two: np.ndarray, K: int) -> np.ndarray:
    """Row-wise Hermitian projection of two-sided LS solutions."""
    out = 0.5 * (two[:, K:] + np.conj(two[:, K::-1]))
    out[:, 0] = two[:, K].real
    return np.ascontiguousarray(out)


@dataclass
class _Cell:
    """One sweep cell (or the single cell of a plain scenario)."""

    index: int
    axis_value: float
    K: int
    d: float
    mu: float
    sigma: float
    theta0: ModelParams


# Shared, read-only run data; set before worker fork so children inherit it.
_POOL: dict = {}


def _slave_pass(master_rows, a_fit, theta0: ModelParams, theta_true: ModelParams,
                mu: float, coupling, dom: DomainConfig, *, decimate_obs: int = 1,
                store_stride: int = 1, field_idx=()) -> tuple[RunTrace, str, dict]:
    """Drive the adaptive slave along a precomputed fit sequence.

    a_fit[i] is the coefficient fit available at time i*h; with decimation the
    last fit is held between observation events.  Metrics are recorded at the
    stored step's pre-update state.  Returns the (possibly truncated) trace,
    "ok"/"diverged", and the slave coefficients at the requested field
    snapshot indices.
    """
    n = dom.n_steps
    idx = _stored_indices(n, store_stride)
    pos = {i: r for r, i in enumerate(idx)}
    times = np.asarray(idx, dtype=np.float64) * dom.h
    e2 = np.empty(len(idx))
    cost = np.empty(len(idx))
    theta_hat = np.empty((len(idx), 3))
    err2 = np.empty((len(idx), 3))
    th_true = theta_true.as_array()

    b0 = zero_coeffs(dom.K)
    b0[1] = 0.5
    state = init_slave_state(b0, theta0, coupling, mu, dom.omega0)
    a_hat = a_fit[0]
    field_set = set(field_idx)
    fields: dict[int, np.ndarray] = {}
    status = "ok"
    rows = 0
    for i in range(n + 1):
        if i % decimate_obs == 0:
            a_hat = a_fit[i]
        r = pos.get(i)
        if r is not None:
            e2[r] = _safe_e2(master_rows[i], state.b)
            cost[r] = cost_C(a_hat - state.b)
            theta_hat[r] = state.theta_hat.as_array()
            d = theta_hat[r] - th_true
            err2[r] = d * d
            rows = r + 1
        if i in field_set:
            fields[i] = state.b.copy()
        if i == n:
            break
        try:
            state = adaptive_step(state, a_hat, dom.h)
        except DivergenceError:
            status = "diverged"
            break
    trace = RunTrace(times=times[:rows], e2_norm=e2[:rows], cost=cost[:rows],
                     theta_hat=theta_hat[:rows], err2=err2[:rows])
    return trace, status, fields


def _write_lines(path: Path, header: str, rows) -> None:
    rows = list(rows)
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")


def _trace_rows(trace: RunTrace):
    for r in range(len(trace.times)):
        yield ",".join([
            _fmt(trace.times[r]),
            _fmt(trace.e2_norm[r]),
            _fmt(trace.cost[r]),
            _fmt(trace.theta_hat[r, 0]),
            _fmt(trace.theta_hat[r, 1]),
            _fmt(trace.theta_hat[r, 2]),
            _fmt(trace.err2[r, 0]),
            _fmt(trace.err2[r, 1]),
            _fmt(trace.err2[r, 2]),
        ])


def _field_rows(fields: dict, master_rows, xs, X: float, h: float):
    for i in sorted(fields):
        u = synthesize_field(master_rows[i], xs, X)
        b = fields[i]
        v = synthesize_field(b, xs, X) if b is not None else np.zeros_like(u)
        t = i * h
        for j in range(xs.shape[0]):
            yield ",".join([_fmt(t), _fmt(xs[j]), _fmt(u[j]), _fmt(v[j]),
                            _fmt(u[j] - v[j])])


def _run_name(prefix: str, run_id: int, total: int) -> str:
    if total == 1:
        return f"{prefix}.csv"
    return f"{prefix}_run{run_id:03d}.csv"


def _trace_stats(trace: RunTrace, status: str):
    """(tail mean of e2, final raw squared parameter errors); nan on failure."""
    nan3 = (float("nan"),) * 3
    if status != "ok" or len(trace.times) < 2:
        return float("nan"), nan3
    tail = tail_average(trace.e2_norm, trace.times, TAIL_FRACTION)
    fin = trace.err2[-1]
    return float(tail), (float(fin[0]), float(fin[1]), float(fin[2]))


def _run_replicate(task):
    """Worker body: one replicate of one cell.  Reads shared state from
    _POOL, writes its own trace (and field) files, returns summary stats."""
    run_id, cell_idx, _rep = task
    d = _POOL
    cfg: ExperimentConfig = d["cfg"]
    cell: _Cell = d["cells"][cell_idx]
    rng = np.random.default_rng(d["base_seed"] + run_id)
    dom = DomainConfig(X=cfg.X, K=cell.K, h=cfg.h, T=cfg.T)
    setup, a_clean = d["fits"][cell.K]
    n = dom.n_steps
    out: Path = d["out"]
    compare = cfg.scenario == "ubkf_compare"

    if compare:
        U = d["U_clean"]
        if cell.sigma > 0:
            U = U + cell.sigma * rng.standard_normal(U.shape)
        a_fit = _fold_batch(U @ setup.ls_operator.T, cell.K)
    elif cell.sigma > 0:
        noise_two = (cell.sigma * rng.standard_normal((n + 1, setup.J))) @ setup.ls_operator.T
        a_fit = a_clean + _fold_batch(noise_two, cell.K)
    else:
        a_fit = a_clean

    coupling = scalar_coupling(cell.d)
    trace, status, fields = _slave_pass(
        d["master"], a_fit, cell.theta0, d["theta_true"], cell.mu, coupling, dom,
        decimate_obs=cfg.decimate_obs, store_stride=cfg.store_stride,
        field_idx=d["field_idx"],
    )
    prefix = "trace_sync" if compare else "trace"
    _write_lines(out / _run_name(prefix, run_id, d["total"]), TRACE_HEADER,
                 _trace_rows(trace))
    if fields:
        fprefix = "field_sync" if compare else "field"
        _write_lines(out / _run_name(fprefix, run_id, d["total"]), FIELD_HEADER,
                     _field_rows(fields, d["master"], d["xs"], cfg.X, cfg.h))
    tail, fin = _trace_stats(trace, status)
    result = {"run_id": run_id, "cell": cell_idx, "status": status,
              "tail": tail, "final": fin}

    if compare:
        init = default_filter_state(cell.K, max(cell.sigma, _R_FLOOR_SIGMA))
        ftrace, fstatus = run_ubkf(
            init, U[1:], setup, dom, truth=d["master"], theta_true=d["theta_true"],
            store_stride=cfg.store_stride, update_every=cfg.decimate_obs,
        )
        _write_lines(out / _run_name("trace_ubkf", run_id, d["total"]),
                     TRACE_HEADER, _trace_rows(ftrace))
        ftail, ffin = _trace_stats(ftrace, fstatus)
        result["ubkf"] = {"status": fstatus, "tail": ftail, "final": ffin}
    return result


def _build_cells(cfg: ExperimentConfig, power: float) -> list[_Cell]:
    def base_sigma(snr_db=None):
        if cfg.noise_mode == "off":
            return 0.0
        if cfg.noise_mode == "fixed_sigma":
            return cfg.noise_sigma
        return calibrate_sigma(power, cfg.noise_snr_db if snr_db is None else snr_db)

    theta_true = cfg.params()
    if cfg.scenario == "sync":
        theta0, mu = theta_true, 0.0
    else:
        theta0, mu = ModelParams(0.0, 0.0, 0.0), cfg.mu

    if cfg.scenario != "sweep":
        return [_Cell(0, float("nan"), cfg.K, cfg.coupling_d, mu, base_sigma(), theta0)]

    spec = cfg.sweep()
    cells = []
    for i, v in enumerate(sorted(spec.values)):
        K, d, m = cfg.K, cfg.coupling_d, mu
        sigma = base_sigma()
        if spec.axis == "K":
            K = int(v)
        elif spec.axis == "D":
            d = float(v)
        elif spec.axis == "mu":
            m = float(v)
        else:
            sigma = base_sigma(float(v))
        # zero adaptation rate means the synchronization protocol:
        # parameters pinned to truth instead of adapted from zero
        t0 = theta_true if m == 0.0 else theta0
        cells.append(_Cell(i, float(v), K, d, m, sigma, t0))
    return cells


def _prepare(cfg: ExperimentConfig, out: Path) -> dict:
    theta = cfg.params()
    n_steps = DomainConfig(X=cfg.X, K=cfg.K, h=cfg.h, T=cfg.T).n_steps
    if cfg.scenario == "control":
        master = np.zeros((n_steps + 1, cfg.K + 1), dtype=np.complex128)
        times = np.arange(n_steps + 1) * cfg.h
        r = np.clip(times / cfg.control_ramp_T, 0.0, 1.0)
        master[:, 0] = cfg.control_target * (3.0 * r * r - 2.0 * r ** 3)
    else:
        dom_m = DomainConfig(X=cfg.X, K=cfg.M, h=cfg.h, T=cfg.T)
        c0 = burn_in_init(theta, dom_m, cfg.burn_T)
        master = simulate_master(c0, theta, dom_m, store_stride=1).coeffs

    mags = np.abs(master) ** 2
    power = float(np.mean(mags[:, 0] + 2.0 * mags[:, 1:].sum(axis=1)))
    xs = uniform_grid(cfg.grid_J, cfg.X)
    cells = _build_cells(cfg, power)

    fits: dict[int, tuple] = {}
    U_clean = None
    if cfg.scenario != "simulate":
        wts = np.ones(master.shape[1])
        wts[1:] = 2.0
        basis = np.exp(1j * (2.0 * np.pi / cfg.X) * np.outer(xs, np.arange(master.shape[1])))
        U_clean = ((master * wts) @ basis.T).real
        for K in sorted({c.K for c in cells}):
            setup = build_setup(xs, K, cfg.X)
            a_clean = _fold_batch(U_clean @ setup.ls_operator.T, K)
            fits[K] = (setup, a_clean)

    stride = cfg.resolved_field_stride()
    field_idx: list[int] = []
    if stride > 0:
        stored = _stored_indices(n_steps, cfg.store_stride)
        field_idx = stored[::stride]
        if field_idx[-1] != stored[-1]:
            field_idx.append(stored[-1])

    total = len(cells) * cfg.runs
    return {
        "cfg": cfg,
        "master": master,
        "power": power,
        "xs": xs,
        "U_clean": U_clean,
        "fits": fits,
        "cells": cells,
        "theta_true": theta,
        "base_seed": cfg.base_seed,
        "field_idx": field_idx,
        "total": total,
        "out": out,
    }


def _summary_rows(cells, runs: int, results_by_cell) -> list[str]:
    rows = []
    for cell in cells:
        reps = results_by_cell[cell.index]
        oks = [r for r in reps if r["status"] == "ok"]
        nfail = len(reps) - len(oks)
        if oks:
            tails = np.asarray([r["tail"] for r in oks])
            fins = np.asarray([r["final"] for r in oks])
            tail_mean = float(np.mean(tails))
            tail_std = float(np.std(tails))
            fin_mean = np.mean(fins, axis=0)
        else:
            tail_mean = tail_std = float("nan")
            fin_mean = np.full(3, np.nan)
        status = "ok" if nfail == 0 else f"failed{nfail}of{len(reps)}"
        rows.append(",".join([
            _fmt(cell.axis_value),
            str(cell.index * runs),
            _fmt(tail_mean),
            _fmt(tail_std),
            _fmt(fin_mean[0]),
            _fmt(fin_mean[1]),
            _fmt(fin_mean[2]),
            status,
        ]))
    return rows


def _run_simulate(cfg: ExperimentConfig, out: Path, data: dict) -> dict:
    n = DomainConfig(X=cfg.X, K=cfg.M, h=cfg.h, T=cfg.T).n_steps
    idx = _stored_indices(n, cfg.store_stride)
    m = len(idx)
    theta = cfg.params().as_array()
    trace = RunTrace(
        times=np.asarray(idx, dtype=np.float64) * cfg.h,
        e2_norm=np.zeros(m),
        cost=np.zeros(m),
        theta_hat=np.tile(theta, (m, 1)),
        err2=np.zeros((m, 3)),
    )
    paths = {"trace": out / "trace.csv", "summary": out / "summary.csv"}
    _write_lines(paths["trace"], TRACE_HEADER, _trace_rows(trace))
    if data["field_idx"]:
        fields = {i: None for i in data["field_idx"]}
        paths["field"] = out / "field.csv"
        _write_lines(paths["field"], FIELD_HEADER,
                     _field_rows(fields, data["master"], data["xs"], cfg.X, cfg.h))
    _write_lines(paths["summary"], SUMMARY_HEADER, [
        ",".join([_fmt(float("nan")), "0", _fmt(0.0), _fmt(0.0),
                  _fmt(0.0), _fmt(0.0), _fmt(0.0), "ok"]),
    ])
    return paths


def run_scenario(cfg: ExperimentConfig, *, jobs: int = 1, out_dir=None) -> dict:
    """Execute a scenario end to end; returns the written file paths.

    Raises ConfigError for invalid configs, DivergenceError if the drive
    itself diverges or no replicate finishes; individual replicate failures
    are recorded in the summary status column instead.
    """
    validate_config(cfg)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = _prepare(cfg, out)
    if cfg.scenario == "simulate":
        return _run_simulate(cfg, out, data)

    global _POOL
    _POOL = data
    tasks = [(c.index * cfg.runs + rep, c.index, rep)
             for c in data["cells"] for rep in range(cfg.runs)]
    if jobs > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
            results = list(ex.map(_run_replicate, tasks))
    else:
        results = [_run_replicate(t) for t in tasks]
    _POOL = {}

    by_cell: dict[int, list] = {c.index: [] for c in data["cells"]}
    for r in results:
        by_cell[r["cell"]].append(r)
    if all(r["status"] != "ok" for r in results):
        raise DivergenceError("every replicate diverged; see per-run traces")

    paths: dict = {"summary": out / "summary.csv"}
    sync_rows = _summary_rows(data["cells"], cfg.runs, by_cell)
    _write_lines(paths["summary"], SUMMARY_HEADER, sync_rows)
    prefix = "trace_sync" if cfg.scenario == "ubkf_compare" else "trace"
    paths["traces"] = [out / _run_name(prefix, t[0], data["total"]) for t in tasks]
    if cfg.scenario == "ubkf_compare":
        ub_cell: dict[int, list] = {c.index: [] for c in data["cells"]}
        for r in results:
            u = dict(r["ubkf"])
            u["cell"] = r["cell"]
            ub_cell[r["cell"]].append(u)
        paths["summary_sync"] = out / "summary_sync.csv"
        paths["summary_ubkf"] = out / "summary_ubkf.csv"
        _write_lines(paths["summary_sync"], SUMMARY_HEADER, sync_rows)
        _write_lines(paths["summary_ubkf"], SUMMARY_HEADER,
                     _summary_rows(data["cells"], cfg.runs, ub_cell))
        paths["traces_ubkf"] = [out / _run_name("trace_ubkf", t[0], data["total"])
                                for t in tasks]
    return paths
