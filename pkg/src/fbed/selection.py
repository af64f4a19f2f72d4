"""Forward-backward selection, with and without early dropping.

``fbs`` re-evaluates every remaining candidate at each forward iteration.
``fbed`` instead drops, after each iteration, every candidate the criterion
rejected given the current selection; dropped candidates are reconsidered
only by a later run, and at most ``K`` extra runs are made. Both finish with
the same backward phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .criteria import Criterion, Decision
from .dataset import Dataset


@dataclass(frozen=True)
class TraceEvent:
    run: int | None  # None for the backward phase
    iteration: int
    kind: str  # "include", "drop" or "remove"
    variable: int
    score: float


@dataclass
class SelectionResult:
    selected: list[int]
    trace: list[TraceEvent] = field(default_factory=list)
    n_evaluations: int = 0
    runs_executed: int = 0
    forward_selected: list[int] = field(default_factory=list)

    def events(self, kind: str, run: int | None = None) -> list[TraceEvent]:
        return [e for e in self.trace if e.kind == kind and (run is None or e.run == run)]


def _best(candidates: Sequence[int], decisions: Sequence[Decision],
          prefer_high: bool = False) -> int | None:
    """Best accepted candidate; ties go to the lowest variable index."""
    best = None
    best_key = None
    for v, dec in zip(candidates, decisions):
        if not dec.accept:
            continue
        key = (-dec.score if prefer_high else dec.score, v)
        if best_key is None or key < best_key:
            best, best_key = v, key
    return best


class _Search:
    """Mutable bookkeeping for one selection call: trace and decision counter."""

    def __init__(self, d: Dataset | None, c: Criterion,
                 on_remove: Callable[[list[int], int], None] | None = None):
        self.d = d
        self.c = c
        self.p = c.n_variables(d)
        self.trace: list[TraceEvent] = []
        self.n_evaluations = 0
        self.runs = 0
        self.on_remove = on_remove

    def result(self, S, forward=()) -> SelectionResult:
        return SelectionResult(list(S), list(self.trace), self.n_evaluations,
                               self.runs, list(forward))

    def forward_sweep(self, S, R) -> list[Decision]:
        self.n_evaluations += len(R)
        return self.c.forward_sweep(self.d, list(S), list(R))

    def one_run(self, S: list[int], run: int) -> list[int]:
        S = list(S)
        chosen = set(S)
        R = [v for v in range(self.p) if v not in chosen]
        iteration = 0
        while R:
            iteration += 1
            decisions = self.forward_sweep(S, R)
            best = _best(R, decisions)
            if best is not None:
                S.append(best)
                self.trace.append(TraceEvent(run, iteration, "include", best,
                                             decisions[R.index(best)].score))
            survivors = []
            for v, dec in zip(R, decisions):
                if v == best:
                    continue
                if dec.accept:
                    survivors.append(v)
                else:
                    self.trace.append(TraceEvent(run, iteration, "drop", v, dec.score))
            R = survivors
        return S

    def forward_phase(self) -> list[int]:
        S: list[int] = []
        R = list(range(self.p))
        iteration = 0
        self.runs = 1
        while R:
            iteration += 1
            decisions = self.forward_sweep(S, R)
            best = _best(R, decisions)
            if best is None:
                break
            S.append(best)
            self.trace.append(TraceEvent(0, iteration, "include", best,
                                         decisions[R.index(best)].score))
            R.remove(best)
        return S

    def backward_phase(self, S: Sequence[int]) -> list[int]:
        S = list(S)
        iteration = 0
        while S:
            iteration += 1
            self.n_evaluations += len(S)
            decisions = self.c.backward_sweep(self.d, list(S), list(S))
            worst = _best(S, decisions, prefer_high=self.c.removal_prefers_high)
            if worst is None:
                break
            score = decisions[S.index(worst)].score
            S.remove(worst)
            self.trace.append(TraceEvent(None, iteration, "remove", worst, score))
            if self.on_remove is not None:
                self.on_remove(list(S), worst)
        return S


def _attach_partial(exc: Exception, search: _Search, S) -> None:
    exc.partial_result = search.result(S)


def fbs(d: Dataset | None, c: Criterion,
        on_remove: Callable[[list[int], int], None] | None = None) -> SelectionResult:
    """Forward-backward selection without early dropping.

    ``d`` may be None for criteria that do not look at data (the graph
    oracle). ``on_remove(S, v)`` is called after each backward removal.
    """
    search = _Search(d, c, on_remove)
    S: list[int] = []
    try:
        S = search.forward_phase()
        forward = list(S)
        S = search.backward_phase(S)
    except ArithmeticError as exc:
        _attach_partial(exc, search, S)
        raise
    return search.result(S, forward)


def fbed(d: Dataset | None, c: Criterion, K: int | float = 0,
         on_remove: Callable[[list[int], int], None] | None = None) -> SelectionResult:
    """Forward-backward selection with early dropping and up to ``K`` extra runs.

    ``K=math.inf`` keeps running until a run selects nothing new.
    """
    if K < 0 or (K != math.inf and int(K) != K):
        raise ValueError("K must be a nonnegative integer or math.inf")
    search = _Search(d, c, on_remove)
    S: list[int] = []
    try:
        changed = True
        while search.runs <= K and changed:
            grown = search.one_run(S, search.runs)
            search.runs += 1
            changed = len(grown) > len(S)
            S = grown
        forward = list(S)
        S = search.backward_phase(S)
    except ArithmeticError as exc:
        _attach_partial(exc, search, S)
        raise
    return search.result(S, forward)


def one_run(d: Dataset | None, c: Criterion, S: Sequence[int] = ()) -> list[int]:
    """A single early-dropping forward run starting from ``S``."""
    if len(set(S)) != len(S):
        raise ValueError("S contains duplicates")
    return _Search(d, c).one_run(list(S), 0)


def backward_phase(d: Dataset | None, c: Criterion, S: Sequence[int]) -> list[int]:
    """Repeatedly remove the best removable variable until none qualifies."""
    if len(set(S)) != len(S):
        raise ValueError("S contains duplicates")
    return _Search(d, c).backward_phase(S)
