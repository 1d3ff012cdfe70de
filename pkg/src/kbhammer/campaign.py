"""Monte Carlo benchmark harness.

Each (experiment, run) pair draws one dataset from seed ``master + run``
and scores every estimator on it.  Results are collected, sorted by
(experiment, run, estimator) and written as CSV; the output bytes depend
only on the configuration and master seed.  Wall-clock times go to a
separate ``timings.csv`` so that ``runs.csv`` and ``summary.csv`` stay
reproducible byte for byte.
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baseline import baseline_fit
from .datagen import ExperimentConfig, generate_run
from .em import EmConfig, em_fit
from .errors import KBHError
from .io import fmt
from .metrics import align_scale, score
from .nonlinearity import polynomial_basis

log = logging.getLogger(__name__)

ESTIMATORS = ("kbh", "baseline")
RUNS_HEADER = ["experiment", "nu", "snr", "run", "seed", "estimator",
               "fit_g", "fit_f", "iterations", "status"]
TIMINGS_HEADER = ["experiment", "run", "estimator", "seconds"]
SUMMARY_HEADER = ["experiment", "nu", "snr", "estimator", "metric",
                  "count", "min", "q1", "median", "q3", "max"]
MAX_FAILURE_RATE = 0.10


@dataclass(frozen=True)
class RunRow:
    experiment: int
    nu: int
    snr: float
    run: int
    seed: int
    estimator: str
    fit_g: Optional[float]
    fit_f: Optional[float]
    iterations: int
    status: str  # "ok" or "failed"
    seconds: float = 0.0


@dataclass
class CampaignResult:
    experiments: list
    rows: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)  # (experiment, run) -> overlay payload

    @property
    def failure_rate(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.status != "ok" for r in self.rows) / len(self.rows)


def fit_estimator(name, data, basis, n, em_config: EmConfig):
    """Run one estimator; returns (g_hat, c_hat, iterations)."""
    if name == "kbh":
        est = em_fit(data, basis, n, em_config)
        return est.g_hat, est.c_hat, est.iterations
    if name == "baseline":
        est = baseline_fit(data, basis, n)
        return est.g_hat, est.c_hat, 0
    raise ValueError(f"unknown estimator {name!r}")


def _run_task(task):
    exp_id, cfg, run, seed, em_kwargs = task
    basis = polynomial_basis(cfg.p)
    data, truth = generate_run(cfg, seed, basis)
    rows = []
    payload = {"g": truth.g.tolist(), "c": truth.c.tolist(), "estimates": {}}
    for name in ESTIMATORS:
        t0 = time.perf_counter()
        try:
            g_hat, c_hat, iters = fit_estimator(
                name, data, basis, cfg.n, EmConfig(rng_seed=seed, **em_kwargs))
            report = score(truth.g, truth.c, g_hat, c_hat, basis, data.u)
            g_al, c_al = align_scale(g_hat, c_hat, truth.g)
            payload["estimates"][name] = {"g": g_al.tolist(), "c": c_al.tolist()}
            fg, ff, status = report.fit_g, report.fit_f, "ok"
        except (KBHError, np.linalg.LinAlgError, ValueError) as exc:
            log.warning("experiment %d run %d %s failed: %s", exp_id, run, name, exc)
            fg = ff = None
            iters, status = 0, "failed"
        rows.append(RunRow(exp_id, cfg.nu, cfg.snr, run, seed, name, fg, ff, iters, status,
                           time.perf_counter() - t0))
    return exp_id, run, rows, payload


def run_campaign(experiments, runs: Optional[int] = None, seed: Optional[int] = None,
                 jobs: int = 1, tol: float = 1e-3, max_iter: int = 200) -> CampaignResult:
    """Execute every experiment; ``runs``/``seed`` override the per-experiment values."""
    experiments = [replace(e, **{k: v for k, v in (("runs", runs), ("seed", seed)) if v is not None})
                   for e in experiments]
    em_kwargs = {"tol": tol, "max_iter": max_iter}
    tasks = [(i, cfg, r, cfg.seed + r, em_kwargs)
             for i, cfg in enumerate(experiments, start=1) for r in range(cfg.runs)]
    result = CampaignResult(experiments=experiments)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_task, tasks))
    else:
        outputs = [_run_task(t) for t in tasks]
    for exp_id, run, rows, payload in sorted(outputs, key=lambda o: (o[0], o[1])):
        result.rows.extend(rows)
        result.estimates[(exp_id, run)] = payload
    return result


def five_number(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return (0, None, None, None, None, None)
    q = np.percentile(v, [0, 25, 50, 75, 100])
    return (v.size, *map(float, q))


def summarize(rows):
    """Five-number summaries per (experiment, estimator, metric)."""
    groups = {}
    for r in rows:
        key = (r.experiment, r.nu, r.snr, r.estimator)
        groups.setdefault(key, []).append(r)
    out = []
    for (exp, nu, snr, est), members in sorted(groups.items(),
                                               key=lambda kv: (kv[0][0], ESTIMATORS.index(kv[0][3])
                                                               if kv[0][3] in ESTIMATORS else 99)):
        ok = [m for m in members if m.status == "ok"]
        for metric in ("fit_g", "fit_f"):
            out.append((exp, nu, snr, est, metric, *five_number([getattr(m, metric) for m in ok])))
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(_cell(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_campaign(result: CampaignResult, out_dir):
    out = Path(out_dir)
    (out / "estimates").mkdir(parents=True, exist_ok=True)
    _write_csv(out / "runs.csv", RUNS_HEADER,
               [(r.experiment, r.nu, float(r.snr), r.run, r.seed, r.estimator,
                 r.fit_g, r.fit_f, r.iterations, r.status) for r in result.rows])
    _write_csv(out / "summary.csv", SUMMARY_HEADER,
               [(e, nu, float(snr), est, m, *rest) for e, nu, snr, est, m, *rest in summarize(result.rows)])
    _write_csv(out / "timings.csv", TIMINGS_HEADER,
               [(r.experiment, r.run, r.estimator, round(r.seconds, 6)) for r in result.rows])
    meta = {"experiments": [asdict(e) for e in result.experiments], "estimators": list(ESTIMATORS)}
    (out / "campaign.json").write_text(json.dumps(meta, indent=1) + "\n")
    for (exp, run), payload in result.estimates.items():
        (out / "estimates" / f"exp{exp}_run{run:03d}.json").write_text(json.dumps(payload) + "\n")
