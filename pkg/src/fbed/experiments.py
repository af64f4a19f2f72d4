"""Simulation harnesses: false selections on null data and oracle blanket recovery.

Both harnesses split work into independent replicate tasks seeded with
``seed + replicate index``; results are aggregated in a fixed order, so the
reports do not depend on ``threads``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from .criteria import LRTest
from .dataset import generate_null_dataset
from .graphs import (
    NonUniqueBlanketError,
    brute_force_mb,
    markov_blanket,
    oracle_criterion,
    random_dag,
)
from .selection import fbed, fbs

ALGORITHMS = ("fbed0", "fbed1", "fbedinf", "fbs")
_RUNS = {"fbed0": 0, "fbed1": 1, "fbedinf": math.inf}


def k_label(K: int | float) -> str:
    return "inf" if K == math.inf else str(int(K))


def _map(fn: Callable, tasks: Sequence, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def run_algorithm(name: str, d, c):
    if name == "fbs":
        return fbs(d, c)
    return fbed(d, c, _RUNS[name])


# ---------------------------------------------------------------------------
# multiple-testing simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MtRow:
    algorithm: str
    p: int
    alpha: float
    mean_selected: float
    ratio_to_alpha_p: float
    mean_evaluations: float


@dataclass
class MtReport:
    n: int
    n_reps: int
    seed: int
    rows: list[MtRow] = field(default_factory=list)

    def get(self, algorithm: str, p: int, alpha: float) -> MtRow:
        for row in self.rows:
            if row.algorithm == algorithm and row.p == p and row.alpha == alpha:
                return row
        raise KeyError((algorithm, p, alpha))

    @property
    def p_values(self) -> list[int]:
        return sorted({r.p for r in self.rows})

    @property
    def alphas(self) -> list[float]:
        return sorted({r.alpha for r in self.rows})

    def to_records(self) -> list[dict]:
        meta = {"kind": "meta", "report": "mt", "n": self.n, "n_reps": self.n_reps,
                "seed": self.seed}
        return [meta] + [{"kind": "row", **asdict(r)} for r in self.rows]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.to_records())

    def to_table(self) -> str:
        cells = [(p, a) for p in self.p_values for a in self.alphas]
        head = f"{'':>10}" + "".join(f"{'p=%d a=%g' % c:>15}" for c in cells)
        lines = [f"Mean selected variables over {self.n_reps} null datasets (n={self.n})", head]
        for alg in ALGORITHMS:
            vals = "".join(f"{self.get(alg, p, a).mean_selected:>15.2f}" for p, a in cells)
            lines.append(f"{alg:>10}" + vals)
        lines.append(f"{'alpha*p':>10}" + "".join(f"{a * p:>15.2f}" for p, a in cells))
        lines.append("Selected relative to alpha*p")
        for alg in ALGORITHMS:
            vals = "".join(f"{100 * self.get(alg, p, a).ratio_to_alpha_p:>14.1f}%" for p, a in cells)
            lines.append(f"{alg:>10}" + vals)
        lines.append("Mean criterion evaluations")
        for alg in ALGORITHMS:
            vals = "".join(f"{self.get(alg, p, a).mean_evaluations:>15.1f}" for p, a in cells)
            lines.append(f"{alg:>10}" + vals)
        return "\n".join(lines) + "\n"


def _mt_task(task):
    n, p, alphas, seed = task
    d = generate_null_dataset(n, p, seed)
    out = []
    for alpha in alphas:
        c = LRTest(alpha)
        for alg in ALGORITHMS:
            res = run_algorithm(alg, d, c)
            out.append((alg, p, alpha, len(res.selected), res.n_evaluations))
    return out


def run_mt_simulation(n: int, p_list: Iterable[int], alpha_list: Iterable[float],
                      n_reps: int, seed: int, threads: int = 1) -> MtReport:
    """Run FBS and FBED(0, 1, inf) with logistic LR tests on null datasets."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    p_list = list(p_list)
    alpha_list = list(alpha_list)
    tasks = [(n, p, tuple(alpha_list), seed + rep) for p in p_list for rep in range(n_reps)]
    sums: dict[tuple, list[float]] = {}
    for rows in _map(_mt_task, tasks, threads):
        for alg, p, alpha, n_sel, n_eval in rows:
            acc = sums.setdefault((alg, p, alpha), [0.0, 0.0])
            acc[0] += n_sel
            acc[1] += n_eval
    report = MtReport(n=n, n_reps=n_reps, seed=seed)
    for p in p_list:
        for alpha in alpha_list:
            for alg in ALGORITHMS:
                n_sel, n_eval = sums[(alg, p, alpha)]
                mean = n_sel / n_reps
                report.rows.append(MtRow(alg, p, alpha, mean, mean / (alpha * p), n_eval / n_reps))
    return report


# ---------------------------------------------------------------------------
# Markov-blanket recovery with an independence oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MbRow:
    K: str
    n_nodes: int
    edge_prob: float
    n_latent: int
    n_graphs: int
    n_skipped: int
    exact_recovery_rate: float
    superset_rate: float
    mean_evaluations: float


@dataclass
class MbReport:
    seed: int
    rows: list[MbRow] = field(default_factory=list)

    def get(self, K) -> MbRow:
        label = K if isinstance(K, str) else k_label(K)
        for row in self.rows:
            if row.K == label:
                return row
        raise KeyError(K)

    def to_records(self) -> list[dict]:
        meta = {"kind": "meta", "report": "mb", "seed": self.seed}
        return [meta] + [{"kind": "row", **asdict(r)} for r in self.rows]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.to_records())

    def to_table(self) -> str:
        lines = [f"{'K':>5}{'nodes':>7}{'edge_p':>8}{'latent':>8}{'graphs':>8}"
                 f"{'skipped':>9}{'exact':>8}{'superset':>10}{'evals':>9}"]
        for r in self.rows:
            lines.append(f"{r.K:>5}{r.n_nodes:>7}{r.edge_prob:>8.2f}{r.n_latent:>8}"
                         f"{r.n_graphs:>8}{r.n_skipped:>9}{r.exact_recovery_rate:>8.3f}"
                         f"{r.superset_rate:>10.3f}{r.mean_evaluations:>9.1f}")
        return "\n".join(lines) + "\n"


def true_blanket(g, target: int) -> set[int]:
    return brute_force_mb(g, target) if g.latent else markov_blanket(g, target)


def _mb_task(task):
    n_nodes, edge_prob, n_latent, Ks, seed = task
    g = random_dag(n_nodes, edge_prob, n_latent, seed)
    try:
        truth = true_blanket(g, 0)
    except NonUniqueBlanketError:
        return None
    c = oracle_criterion(g, 0)
    out = []
    for K in Ks:
        res = fbed(None, c, K)
        got = c.to_nodes(res.selected)
        out.append((k_label(K), got == truth, got >= truth, res.n_evaluations))
    return out


def run_mb_recovery(n_graphs: int, n_nodes: int, edge_prob: float, n_latent: int,
                    K_list: Sequence[int | float], seed: int, threads: int = 1) -> MbReport:
    """Compare oracle FBED(K) selections with the true blanket of node 0."""
    tasks = [(n_nodes, edge_prob, n_latent, tuple(K_list), seed + i) for i in range(n_graphs)]
    results = _map(_mb_task, tasks, threads)
    skipped = sum(r is None for r in results)
    kept = [r for r in results if r is not None]
    report = MbReport(seed=seed)
    for j, K in enumerate(K_list):
        m = len(kept)
        exact = sum(r[j][1] for r in kept)
        sup = sum(r[j][2] for r in kept)
        evals = sum(r[j][3] for r in kept)
        report.rows.append(MbRow(
            K=k_label(K), n_nodes=n_nodes, edge_prob=edge_prob, n_latent=n_latent,
            n_graphs=m, n_skipped=skipped,
            exact_recovery_rate=exact / m if m else float("nan"),
            superset_rate=sup / m if m else float("nan"),
            mean_evaluations=evals / m if m else float("nan"),
        ))
    return report
