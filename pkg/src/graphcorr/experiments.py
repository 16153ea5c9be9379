"""Monte-Carlo detection sweeps, exact small-n error calculus, and curves.

Sweeps estimate type-I/type-II error rates of the detection tests over a
parameter grid with fully deterministic seeding: the substream of every
trial is addressed by (master seed, cell index, trial index), so identical
configurations reproduce byte-identical CSV output, serial or parallel.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .detect import (
    edge_count_threshold,
    likelihood_ratio_exact,
    qap_exact,
    qap_local_search,
    threshold_er,
    threshold_gaussian,
)
from .moments import _edge_perm_codes, exact_er_lr_table
from .sampling import (
    ErParams,
    GaussianParams,
    SeedSpec,
    sample_null_er,
    sample_null_gaussian,
    sample_planted_er,
    sample_planted_gaussian,
)

__all__ = [
    "SweepConfig",
    "ErrorEstimate",
    "CSV_HEADER",
    "run_sweep",
    "sweep_rows",
    "exact_tv_er",
    "exact_min_error_er",
    "threshold_curves",
    "find_p_star",
    "min_error_sum",
    "binomial_halfwidth",
]

CSV_HEADER = "model,n,rho,p,s,test,trials,type1,type2,err_sum,ci,seed"

KNOWN_TESTS = ("qap-exact", "qap-ls", "lr", "edges")


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification for a detection-error sweep."""

    model: str
    n_values: tuple[int, ...]
    tests: tuple[str, ...]
    trials: int
    master_seed: int
    rho_values: tuple[float, ...] = ()
    p_values: tuple[float, ...] = ()
    s_values: tuple[float, ...] = ()
    threshold_mode: str = "auto"
    restarts: int = 20
    ls_rounds: int = 10

    def __post_init__(self):
        if self.model not in ("gaussian", "er"):
            raise ValueError("model must be 'gaussian' or 'er'")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        bad = [t for t in self.tests if t not in KNOWN_TESTS]
        if bad:
            raise ValueError(f"unknown tests: {bad}")
        if self.model == "gaussian" and "edges" in self.tests:
            raise ValueError("the edge-count test applies to the Erdos-Renyi model only")
        if "lr" in self.tests and max(self.n_values, default=0) > 7:
            raise ValueError("the exact likelihood-ratio test is limited to n <= 7")
        if self.threshold_mode not in ("auto", "oracle"):
            raise ValueError("threshold_mode must be 'auto' or 'oracle'")
        if not self.cells():
            raise ValueError("empty parameter grid")

    def cells(self) -> list:
        if self.model == "gaussian":
            return [GaussianParams(n, r) for n, r in product(self.n_values, self.rho_values)]
        return [
            ErParams(n, p, s)
            for n, p, s in product(self.n_values, self.p_values, self.s_values)
        ]


@dataclass(frozen=True)
class ErrorEstimate:
    """Empirical error rates with binomial 95% half-widths."""

    type1: float
    type2: float
    ci1: float
    ci2: float
    trials: int

    @property
    def err_sum(self) -> float:
        return self.type1 + self.type2

    @property
    def ci(self) -> float:
        return math.hypot(self.ci1, self.ci2)


def binomial_halfwidth(rate: float, trials: int) -> float:
    return 1.96 * math.sqrt(max(rate * (1 - rate), 0.0) / trials)


def min_error_sum(null_stats, planted_stats) -> tuple[float, float]:
    """Minimal empirical type-I + type-II over thresholds of a 'large = planted' statistic.

    Returns (error sum, threshold attaining it).
    """
    ns = np.sort(np.asarray(null_stats, dtype=float))
    ps = np.asarray(planted_stats, dtype=float)
    best, best_tau = 1.0, math.inf  # decide null always
    for tau in np.unique(np.concatenate([ns, ps])):
        t1 = float(np.mean(ns >= tau))
        t2 = float(np.mean(ps < tau))
        if t1 + t2 < best:
            best, best_tau = t1 + t2, float(tau)
    return best, best_tau


def _auto_threshold(test: str, params) -> float:
    if test in ("qap-exact", "qap-ls"):
        if isinstance(params, GaussianParams):
            return threshold_gaussian(params.n, params.rho)
        return threshold_er(params.n, params.p, params.s)
    if test == "lr":
        return 1.0
    if test == "edges":
        return -edge_count_threshold(params.n, params.p, params.s)
    raise ValueError(test)


def _statistic(test: str, a, b, params, seed: SeedSpec, restarts: int, rounds: int) -> float:
    if test == "qap-exact":
        return qap_exact(a, b)[0]
    if test == "qap-ls":
        return qap_local_search(a, b, restarts=restarts, seed=seed, rounds=rounds)[0]
    if test == "lr":
        return likelihood_ratio_exact(a, b, params)
    if test == "edges":
        return -abs(a.edge_count - b.edge_count)
    raise ValueError(test)


def _run_cell(args) -> list[tuple[str, ErrorEstimate]]:
    config, cell_index = args
    params = config.cells()[cell_index]
    gaussian = isinstance(params, GaussianParams)
    stats: dict[str, tuple[list, list]] = {t: ([], []) for t in config.tests}
    for trial in range(config.trials):
        null_seed = SeedSpec(config.master_seed, (cell_index, trial, 0))
        planted_seed = SeedSpec(config.master_seed, (cell_index, trial, 1))
        if gaussian:
            a0, b0 = sample_null_gaussian(params, null_seed)
            a1, b1, _ = sample_planted_gaussian(params, planted_seed)
        else:
            a0, b0 = sample_null_er(params, null_seed)
            a1, b1, _ = sample_planted_er(params, planted_seed)
        for test in config.tests:
            ls_seed = SeedSpec(config.master_seed, (cell_index, trial, 2))
            stats[test][0].append(
                _statistic(test, a0, b0, params, ls_seed, config.restarts, config.ls_rounds)
            )
            stats[test][1].append(
                _statistic(test, a1, b1, params, ls_seed, config.restarts, config.ls_rounds)
            )
    out = []
    for test in config.tests:
        null_stats, planted_stats = stats[test]
        if config.threshold_mode == "oracle":
            _, tau = min_error_sum(null_stats, planted_stats)
        else:
            tau = _auto_threshold(test, params)
        t1 = float(np.mean(np.asarray(null_stats) >= tau))
        t2 = float(np.mean(np.asarray(planted_stats) < tau))
        out.append(
            (
                test,
                ErrorEstimate(
                    t1,
                    t2,
                    binomial_halfwidth(t1, config.trials),
                    binomial_halfwidth(t2, config.trials),
                    config.trials,
                ),
            )
        )
    return out


def _format_cell_rows(config, cell_index, results) -> list[str]:
    params = config.cells()[cell_index]
    if isinstance(params, GaussianParams):
        rho, p, s = f"{params.rho:.6g}", "", ""
    else:
        rho, p, s = "", f"{params.p:.6g}", f"{params.s:.6g}"
    rows = []
    for test, est in results:
        rows.append(
            f"{config.model},{params.n},{rho},{p},{s},{test},{est.trials},"
            f"{est.type1:.6f},{est.type2:.6f},{est.err_sum:.6f},{est.ci:.6f},"
            f"{config.master_seed}"
        )
    return rows


def sweep_rows(config: SweepConfig) -> list[str]:
    """All CSV rows (header excluded) of the sweep, in grid order."""
    cells = list(range(len(config.cells())))
    workers = int(os.environ.get("GRAPHCORR_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, [(config, c) for c in cells]))
    else:
        results = [_run_cell((config, c)) for c in cells]
    rows = []
    for c in cells:
        rows.extend(_format_cell_rows(config, c, results[c]))
    return rows


def run_sweep(config: SweepConfig, out_path=None) -> str:
    """Run the sweep and return (optionally also write) the CSV text."""
    text = "\n".join([CSV_HEADER] + sweep_rows(config)) + "\n"
    if out_path is not None:
        with open(out_path, "w", newline="\n") as f:
            f.write(text)
    return text


# -- exact small-n error calculus -------------------------------------------------


def exact_tv_er(params: ErParams) -> float:
    """Exact total variation between the planted and null laws of (A, B).

    Full enumeration over all graph pairs; feasible for n <= 4.
    """
    lr, q = exact_er_lr_table(params)
    qq = q[:, None] * q[None, :]
    return 0.5 * float(np.abs(qq * lr - qq).sum())


def _qap_stat_table(params: ErParams) -> np.ndarray:
    n = params.n
    m = n * (n - 1) // 2
    gcodes, _ = _edge_perm_codes(n)
    codes = np.arange(1 << m, dtype=np.int64)
    best = np.full((1 << m, 1 << m), -1, dtype=np.int16)
    for row in gcodes:
        joint = codes[:, None] & row[None, :]
        cnt = np.zeros_like(joint, dtype=np.int16)
        for e in range(m):
            cnt += ((joint >> e) & 1).astype(np.int16)
        np.maximum(best, cnt, out=best)
    return best.astype(float)


def exact_min_error_er(params: ErParams, statistic: str) -> float:
    """Minimal type-I + type-II error of a threshold test, by full enumeration.

    ``statistic`` is one of 'lr', 'qap', 'edges'.  The minimum runs over all
    thresholds of the statistic, with larger values deciding planted.
    """
    if statistic not in ("lr", "qap", "edges"):
        raise ValueError(statistic)
    lr, q = exact_er_lr_table(params)
    qq = q[:, None] * q[None, :]
    pp = qq * lr
    if statistic == "lr":
        stat = lr
    elif statistic == "qap":
        stat = _qap_stat_table(params)
    else:
        m = params.n * (params.n - 1) // 2
        pop = np.array([bin(c).count("1") for c in range(1 << m)])
        stat = -np.abs(pop[:, None] - pop[None, :]).astype(float)
    flat = np.stack([stat.ravel(), pp.ravel(), qq.ravel()])
    order = np.argsort(-flat[0], kind="stable")
    svals, pvals, qvals = flat[:, order]
    gain = np.cumsum(pvals - qvals)
    # thresholds sit at group boundaries of equal statistic values
    boundary = np.nonzero(np.diff(svals) != 0)[0]
    candidates = np.concatenate([gain[boundary], gain[-1:]])
    return float(1.0 - max(0.0, candidates.max()))


def find_p_star(tol: float = 1e-10) -> float:
    """Density maximizing p(log(1/p) - 1 + p): the root of log(1/p) = 2(1-p)."""
    f = lambda p: math.log(1 / p) - 2 * (1 - p)
    lo, hi = 0.05, 0.5
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def threshold_curves(model: str, n_min: int, n_max: int, p: float | None = None) -> list[str]:
    """CSV rows of the asymptotic detectability boundaries for plotting.

    Gaussian rows carry the strong-detection and impossibility boundaries for
    rho^2; Erdos-Renyi rows (for a fixed p) the corresponding boundaries for
    s^2 plus the sparse-regime cap min(1/(np), 0.01).
    """
    rows = []
    if model == "gaussian":
        rows.append("model,n,rho2_upper,rho2_lower")
        for n in range(n_min, n_max + 1):
            rows.append(
                f"gaussian,{n},{4 * math.log(n) / (n - 1):.10g},{4 * math.log(n) / n:.10g}"
            )
        return rows
    if model == "er":
        if p is None or not 0 < p < 1:
            raise ValueError("er curves need a density p in (0,1)")
        rows.append("model,n,p,s2_upper,s2_lower_dense,s2_lower_sparse")
        denom = p * (math.log(1 / p) - 1 + p)
        for n in range(n_min, n_max + 1):
            up = 2 * math.log(n) / ((n - 1) * denom)
            lo = 2 * math.log(n) / (n * denom)
            sparse = min(1 / (n * p), 0.01)
            rows.append(f"er,{n},{p:.6g},{up:.10g},{lo:.10g},{sparse:.10g}")
        return rows
    raise ValueError("model must be 'gaussian' or 'er'")
