"""Experiment orchestration: config, seeded runs, records, summaries.

Configs are flat key=value text (dotted keys carry per-experiment
parameters).  Every run is deterministic from (master seed, run index),
so records are identical for any worker count once sorted by run index;
wall-time fields are excluded from that contract.  Records go to a
JSONL file (one object per line, versioned schema) and summaries to CSV.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import brownian, coupling, scales, srw
from .srw import BudgetExceeded

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "srw-cover", "sausage-cover", "hitting", "exit-time", "iid-cover",
    "coupling", "torus-cover", "series-scan", "lil-statistic",
)

# experiment kind -> (record field summarized, extra grouping fields)
_SUMMARY_FIELD = {
    "srw-cover": ("n_over_phi", ("r",)),
    "sausage-cover": ("n_over_phi", ("r",)),
    "hitting": ("hit_inner", ("rho", "r", "P")),
    "exit-time": ("zeta", ("r",)),
    "iid-cover": ("covered", ("r", "k")),
    "coupling": ("m_e", ("r",)),
    "torus-cover": ("ratio", ("epsilon",)),
    "series-scan": ("exponent", ("side",)),
    "lil-statistic": ("statistic", ("alpha",)),
}


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    workers: int = 1

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        experiment = None
        params: dict = {}
        seed, out, workers = 0, None, 1
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"bad config line (need key=value): {raw!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                if key == "experiment":
                    experiment = val
                elif key == "seed":
                    seed = int(val)
                elif key == "out":
                    out = val
                elif key == "workers":
                    workers = int(val)
                else:
                    # dotted keys (srw.r=30,60) drop their prefix
                    params[key.split(".", 1)[-1]] = _parse_value(val)
        if experiment is None:
            raise ValueError("config is missing 'experiment='")
        return cls(experiment, params, seed, out, workers)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        p = self.parameters
        kind = self.experiment
        if kind in ("srw-cover", "sausage-cover", "iid-cover", "coupling"):
            for r in _as_list(p.get("r", 30)):
                if r < 8:
                    raise ValueError(f"r={r} rejected: cover machinery needs r >= 8")
        if kind == "sausage-cover":
            r = min(_as_list(p.get("r", 30)))
            R = float(p.get("R", 0.1))
            if R * math.log(r) ** 3 <= 1:
                raise ValueError("need R (log r)^3 > 1")
            if not 0 < float(p.get("dt", 0.01)) <= 0.01:
                raise ValueError("dt must lie in (0, 0.01]")
            if not 0 < float(p.get("h", 0.2)) <= 0.2:
                raise ValueError("h must lie in (0, 0.2]")
        if kind == "hitting":
            rho, r, P = (float(p.get(k, d)) for k, d in
                         (("rho", 8), ("r", 40), ("P", 200)))
            if not rho < r < P:
                raise ValueError("need rho < r < P")
        if kind == "exit-time":
            if float(p.get("r", 50)) < 1:
                raise ValueError("r must be >= 1")
            if p.get("walk", "srw") not in ("srw", "brownian"):
                raise ValueError("walk must be 'srw' or 'brownian'")
        if kind == "torus-cover":
            eps = float(p.get("epsilon", 0.02))
            if not 0 < eps <= 0.05:
                raise ValueError("epsilon must lie in (0, 0.05]")
            dt = float(p.get("dt", eps * eps / 25.0))
            if dt > eps * eps / 25.0:
                raise ValueError("dt must be <= epsilon^2/25")
        if kind == "series-scan":
            if float(p.get("alpha", 1.05)) <= 1.0:
                raise ValueError("alpha must exceed 1")
            if not 0 <= float(p.get("eps1", 0.0)) < 1.0 / 3.0:
                raise ValueError("eps1 must lie in [0, 1/3)")
            if not 0 <= float(p.get("eps2", 0.0)) < 0.5:
                raise ValueError("eps2 must lie in [0, 1/2)")
            for lam in _as_list(p.get("lam", [0.25])):
                if float(lam) <= 0:
                    raise ValueError("lam must be positive")
        if int(p.get("samples", 1)) < 1:
            raise ValueError("samples must be >= 1")


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


# ---------------------------------------------------------------------------
# per-run workers (top level so they pickle for multiprocessing)

def _run_one(args):
    kind, params, seed, idx = args
    t0 = time.monotonic()
    rec = {"schema": SCHEMA_VERSION, "experiment": kind, "seed": seed,
           "run_index": idx, "budget_exceeded": False}
    p = params
    budget = int(p.get("budget", srw.DEFAULT_BUDGET))
    try:
        if kind == "srw-cover":
            res = srw.simulate_cover(
                p["r"], seed, idx, budget=budget,
                checkpoints=_as_list(p.get("checkpoints", [])),
                engine=p.get("engine", "excursion"))
            rec.update(r=res.r, cover_time=res.cover_time,
                       excursion_count=res.excursion_count,
                       n_over_phi=res.excursion_count / scales.phi(res.r),
                       wall_steps=res.wall_steps, engine=res.engine,
                       synthetic_time=res.synthetic_time,
                       checkpoints=[[int(n), rad, bool(s)]
                                    for n, rad, s in res.checkpoints])
        elif kind == "sausage-cover":
            res = brownian.sausage_cover_run(
                p["r"], float(p.get("R", 0.1)), float(p.get("dt", 0.01)),
                float(p.get("h", 0.2)), seed, idx,
                engine=p.get("engine", "excursion"),
                sausage_radius=float(p.get("sausage_radius", 1.0)),
                budget=budget)
            rec.update(r=res.r, R=res.R, dt=res.dt, h=res.h,
                       cover_time=res.cover_time,
                       excursion_count=res.excursion_count,
                       n_over_phi=res.excursion_count / scales.phi(res.r),
                       steps=res.steps, engine=res.engine,
                       synthetic_time=res.synthetic_time)
        elif kind == "hitting":
            est = srw.hitting_prob_estimate(
                float(p.get("rho", 8)), float(p.get("r", 40)),
                float(p.get("P", 200)), 1, seed, run_index=idx, budget=budget)
            rec.update(rho=float(p.get("rho", 8)), r=float(p.get("r", 40)),
                       P=float(p.get("P", 200)), hit_inner=est.successes)
        elif kind == "exit-time":
            r = float(p.get("r", 50))
            if p.get("walk", "srw") == "srw":
                z, n2 = srw.exit_time_samples(r, 1, seed, run_index=idx,
                                              budget=budget)
                rec.update(r=r, walk="srw", zeta=int(z[0]), exit_norm2=int(n2[0]))
            else:
                res = brownian.brownian_exit_stats(
                    r, 1, seed, run_index=idx, dt=float(p.get("dt", 1e-3)),
                    budget=budget)
                rec.update(r=r, walk="brownian", dt=res.dt, zeta=float(res.times[0]))
        elif kind == "iid-cover":
            covered, unc = coupling.run_union_process(
                p["r"], int(p["k"]), seed=seed, run_index=idx, budget=budget)
            rec.update(r=float(p["r"]), k=int(p["k"]), covered=int(covered),
                       uncovered=unc)
        elif kind == "coupling":
            tr = coupling.coupled_cover_run(
                p["r"], seed, idx, c1=p.get("c1"), budget=budget)
            rec.update(r=tr.r, m_e=tr.m_e, m_f=tr.m_f, sets_used=tr.sets_used,
                       covered=tr.covered, xi_sum=int(sum(tr.xi_draws)),
                       xi_count=len(tr.xi_draws), a_threshold=tr.a_threshold,
                       c1=tr.c1,
                       discrepancy_indices=list(tr.discrepancy_indices))
        elif kind == "torus-cover":
            eps = float(p.get("epsilon", 0.02))
            res = brownian.torus_cover_time(
                eps, float(p.get("dt", eps * eps / 25.0)), seed, idx,
                budget=budget)
            rec.update(epsilon=res.epsilon, dt=res.dt,
                       cover_time=res.cover_time, ratio=res.lil_ratio(),
                       steps=res.steps)
        else:
            raise ValueError(f"no per-run worker for {kind}")
    except BudgetExceeded as exc:
        rec["budget_exceeded"] = True
        rec["steps_at_budget"] = exc.steps
    rec["wall_time"] = time.monotonic() - t0
    return rec


def _series_scan_records(config: ExperimentConfig):
    p = config.parameters
    alpha = float(p.get("alpha", 1.05))
    eps1 = float(p.get("eps1", 0.0))
    eps2 = float(p.get("eps2", 0.0))
    lams = [float(v) for v in _as_list(p.get("lam", [0.15, 0.2, 0.25, 0.3, 0.35]))]
    recs = []
    for i, lam in enumerate(lams):
        for side in ("upper", "lower"):
            exp_, conv = scales.series_exponent(side, lam, alpha, eps1, eps2)
            recs.append({"schema": SCHEMA_VERSION, "experiment": "series-scan",
                         "seed": config.seed, "run_index": len(recs),
                         "budget_exceeded": False, "side": side, "lam": lam,
                         "alpha": alpha, "eps1": eps1, "eps2": eps2,
                         "exponent": float(exp_), "converges": bool(conv),
                         "wall_time": 0.0})
    return recs


def _lil_statistic_records(config: ExperimentConfig):
    """Direct cover-radius sweep: run walks with geometric checkpoints
    t_n = e^(alpha^n) and emit the running LIL statistic per checkpoint."""
    p = dict(config.parameters)
    alpha = float(p.get("alpha", 1.15))
    budget = int(p.get("budget", 10**8))
    samples = int(p.get("samples", 2))
    n = 1
    cps = []
    while True:
        t = scales.t_n(alpha, n)
        if t.value > budget:
            break
        if t.value > scales.E_E:
            cps.append(int(t.value))
        n += 1
    cps = sorted(set(cps))
    recs = []
    for idx in range(samples):
        # cover radius is tracked on a disk big enough to never saturate
        res = srw.simulate_cover(max(8.0, 2.0 * _lil_radius_bound(budget)),
                                 config.seed, idx, budget=budget,
                                 checkpoints=cps, engine="direct",
                                 allow_partial=True)
        recs.append(res)
    out = []
    i = 0
    for idx, res in enumerate(recs):
        running = 0.0
        for step, radius, saturated in res.checkpoints:
            stat = lil_statistic(step, radius)
            running = max(running, stat)
            out.append({"schema": SCHEMA_VERSION, "experiment": "lil-statistic",
                        "seed": config.seed, "run_index": i,
                        "budget_exceeded": False, "walk_index": idx,
                        "n": int(step), "radius": radius,
                        "saturated": bool(saturated), "alpha": alpha,
                        "statistic": stat, "running_max": running,
                        "wall_time": 0.0})
            i += 1
    return out


def _lil_radius_bound(budget: int) -> float:
    """Radius the cover radius cannot plausibly exceed within the budget."""
    return math.exp(math.sqrt(math.log(budget))) + 4.0


def lil_statistic(n: int | float, radius: float) -> float:
    """(log R_n)^2 / (log n * log_3 n); 0 for radius <= 1."""
    if n <= scales.E_E:
        raise ValueError("checkpoint must exceed e^e for log_3")
    if radius <= 1.0:
        return 0.0
    return math.log(radius) ** 2 / (math.log(n) * scales.log3(n))


def lil_statistic_report(records):
    """Rows (n, radius, statistic, running_max) from checkpointed records.

    Accepts srw-cover/lil-statistic records (dicts); checkpoints below the
    log_3 domain edge e^e are omitted.  This is a trend exhibit: the
    infinite-time limsup statement itself has no pass/fail surrogate.
    """
    rows = []
    running = 0.0
    for rec in records:
        if "n" in rec and "radius" in rec:
            pairs = [(rec["n"], rec["radius"])]
        else:
            pairs = [(n, rad) for n, rad, _ in rec.get("checkpoints", [])]
        for n, rad in pairs:
            if n <= scales.E_E:
                continue
            stat = lil_statistic(n, rad)
            running = max(running, stat)
            rows.append({"n": int(n), "radius": float(rad),
                         "statistic": stat, "running_max": running})
    return rows


# ---------------------------------------------------------------------------

def summarize(records, experiment: str):
    """Pure fold of records into summary rows (count/mean/se/median/q05/q95)."""
    value_field, group_fields = _SUMMARY_FIELD[experiment]
    groups: dict = {}
    for rec in records:
        if rec.get("budget_exceeded") or value_field not in rec:
            continue
        key = tuple(rec.get(g) for g in group_fields)
        groups.setdefault(key, []).append(float(rec[value_field]))
    rows = []
    for key in sorted(groups, key=str):
        vals = np.array(groups[key])
        n = len(vals)
        se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        row = {"experiment": experiment, "value": value_field, "count": n,
               "mean": float(vals.mean()), "std_error": se,
               "median": float(np.median(vals)),
               "q05": float(np.quantile(vals, 0.05)),
               "q95": float(np.quantile(vals, 0.95))}
        for g, v in zip(group_fields, key):
            row[g] = v
        rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig):
    """Execute all runs of a config; returns (records, summary_rows).

    Writes records incrementally to <out> (JSONL) and the summary to
    <out>.summary.csv when an output path is configured.
    """
    config.validate()
    kind = config.experiment
    if kind == "series-scan":
        records = _series_scan_records(config)
    elif kind == "lil-statistic":
        records = _lil_statistic_records(config)
    else:
        samples = int(config.parameters.get("samples", 1))
        rs = _as_list(config.parameters.get("r", [None]))
        jobs = []
        idx = 0
        for r in rs:
            params = dict(config.parameters)
            if r is not None:
                params["r"] = r
            for _ in range(samples):
                jobs.append((kind, params, config.seed, idx))
                idx += 1
        if config.workers > 1:
            with Pool(config.workers) as pool:
                records = pool.map(_run_one, jobs)
        else:
            records = [_run_one(j) for j in jobs]
        records.sort(key=lambda rec: rec["run_index"])
    summary = summarize(records, kind)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        _write_summary_csv(config.output_path + ".summary.csv", summary)
    return records, summary


def _write_summary_csv(path: str, rows) -> None:
    fields = sorted({k for row in rows for k in row})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
