"""Genetic search over pin assignments, and the equal-budget random baseline.

A genotype is a :class:`PinAssignment`: one input and one output permutation
per non-reference function.  Fitness is the synthesized area of the merged
circuit (lower is better).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .boolfunc import TruthTable
from .merge import PinAssignment
from .synth import synth_area


@dataclass(frozen=True)
class GaConfig:
    population: int = 100
    generations: int = 97
    tournament_size: int = 3
    crossover_prob: float = 0.8
    mutation_prob: float = 0.2
    seed: int = 0
    budget_individuals: Optional[int] = None
    jobs: int = 1

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if self.tournament_size < 1:
            raise ValueError("tournament size must be at least 1")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.budget_individuals is not None and self.budget_individuals < 1:
            raise ValueError("budget must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def total_evaluations(self) -> int:
        planned = self.population + self.generations * (self.population - 1)
        if self.budget_individuals is not None:
            return min(planned, self.budget_individuals)
        return planned

    @classmethod
    def from_text(cls, text: str, **overrides) -> "GaConfig":
        """Parse ``key = value`` lines (``#`` comments allowed)."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep or key not in types:
                raise ValueError(f"line {lineno}: unknown or malformed setting {line!r}")
            if value.lower() in ("none", ""):
                values[key] = None
            elif "float" in str(types[key]):
                values[key] = float(value)
            else:
                values[key] = int(value)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_ge: Fraction
    mean_ge: float
    evals: int


@dataclass
class GaHistory:
    records: list[GenerationRecord] = field(default_factory=list)

    @property
    def best_ge(self) -> Fraction:
        return self.records[-1].best_ge

    @property
    def evaluations(self) -> int:
        return self.records[-1].evals

    def to_csv(self) -> str:
        lines = ["generation,best_ge,mean_ge,evals"]
        for r in self.records:
            lines.append(f"{r.generation},{float(r.best_ge):.2f},{r.mean_ge:.3f},{r.evals}")
        return "\n".join(lines) + "\n"


# genetic operators

NOVELTY_TRIES = 10

def pmx(p1: Sequence[int], p2: Sequence[int], a: int, b: int) -> tuple[int, ...]:
    """Partially-matched crossover child keeping ``p1[a:b]``."""
    n = len(p1)
    child: list = [None] * n
    child[a:b] = p1[a:b]
    segment = set(p1[a:b])
    where = {v: i for i, v in enumerate(p2)}
    for i in range(a, b):
        v = p2[i]
        if v in segment:
            continue
        pos = i
        while a <= pos < b:
            pos = where[p1[pos]]
        child[pos] = v
    for i in range(n):
        if child[i] is None:
            child[i] = p2[i]
    return tuple(child)


def _perm_list(g: PinAssignment) -> list[tuple[int, ...]]:
    return list(g.in_perms) + list(g.out_perms)


def _from_list(g: PinAssignment, perms: list) -> PinAssignment:
    k = len(g.in_perms)
    return PinAssignment(g.num_inputs, g.num_outputs, tuple(perms[:k]), tuple(perms[k:]))


def mutate(g: PinAssignment, rng: np.random.Generator) -> PinAssignment:
    """Swap two positions in one randomly chosen permutation."""
    perms = _perm_list(g)
    movable = [i for i, p in enumerate(perms) if len(p) > 1]
    if not movable:
        return g
    idx = movable[int(rng.integers(len(movable)))]
    p = list(perms[idx])
    i, j = (int(v) for v in rng.choice(len(p), size=2, replace=False))
    p[i], p[j] = p[j], p[i]
    perms[idx] = tuple(p)
    return _from_list(g, perms)


def crossover(g1: PinAssignment, g2: PinAssignment,
              rng: np.random.Generator) -> tuple[PinAssignment, PinAssignment]:
    """PMX applied independently to every permutation pair."""
    c1, c2 = [], []
    for p1, p2 in zip(_perm_list(g1), _perm_list(g2)):
        a, b = sorted(int(v) for v in rng.integers(0, len(p1) + 1, size=2))
        c1.append(pmx(p1, p2, a, b))
        c2.append(pmx(p2, p1, a, b))
    return _from_list(g1, c1), _from_list(g1, c2)


def random_assignment(n: int, num_inputs: int, num_outputs: int,
                      rng: np.random.Generator) -> PinAssignment:
    ins = tuple(tuple(int(v) for v in rng.permutation(num_inputs)) for _ in range(n - 1))
    outs = tuple(tuple(int(v) for v in rng.permutation(num_outputs)) for _ in range(n - 1))
    return PinAssignment(num_inputs, num_outputs, ins, outs)


# fitness evaluation

def _area(args) -> Fraction:
    functions, assignment = args
    return synth_area(functions, assignment)


class Evaluator:
    """Cached, optionally parallel fitness; results always come back in input order."""

    def __init__(self, functions: Sequence[TruthTable], jobs: int = 1,
                 fitness: Optional[Callable[[PinAssignment], Fraction]] = None):
        self.functions = tuple(functions)
        self.jobs = jobs
        self.fitness = fitness
        self.cache: dict[PinAssignment, Fraction] = {}
        self.evaluations = 0
        self._pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __call__(self, genotypes: Sequence[PinAssignment]) -> list[Fraction]:
        todo = list(dict.fromkeys(g for g in genotypes if g not in self.cache))
        if todo:
            if self.fitness is not None:
                areas = [self.fitness(g) for g in todo]
            elif self.jobs > 1 and len(todo) > 1:
                if self._pool is None:
                    self._pool = ProcessPoolExecutor(self.jobs)
                areas = list(self._pool.map(_area, [(self.functions, g) for g in todo], chunksize=4))
            else:
                areas = [synth_area(self.functions, g) for g in todo]
            self.cache.update(zip(todo, areas))
        self.evaluations += len(genotypes)
        return [self.cache[g] for g in genotypes]


def _check_functions(functions: Sequence[TruthTable]) -> None:
    if len(functions) < 2:
        raise ValueError("pin assignment search needs at least two functions")
    shape = (functions[0].num_inputs, functions[0].num_outputs)
    if any((f.num_inputs, f.num_outputs) != shape for f in functions):
        raise ValueError("all functions must share input and output arity")


def _tournament(fit: list[Fraction], size: int, rng: np.random.Generator) -> int:
    picks = [int(v) for v in rng.integers(len(fit), size=size)]
    return min(picks, key=lambda i: (fit[i], i))


def run_ga(functions: Sequence[TruthTable], cfg: GaConfig = GaConfig(),
           fitness: Optional[Callable[[PinAssignment], Fraction]] = None,
           progress: Optional[Callable[[GenerationRecord], None]] = None
           ) -> tuple[PinAssignment, GaHistory]:
    """Minimise merged area over pin assignments; returns the best-ever genotype."""
    _check_functions(functions)
    n = len(functions)
    m, p = functions[0].num_inputs, functions[0].num_outputs
    budget = cfg.total_evaluations()
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.generations + 1)
    history = GaHistory()

    with Evaluator(functions, cfg.jobs, fitness) as evaluate:
        rng = np.random.default_rng(streams[0])
        size = min(cfg.population, budget)
        pop = [random_assignment(n, m, p, rng) for _ in range(size)]
        fit = evaluate(pop)
        best_i = min(range(len(pop)), key=lambda i: (fit[i], i))
        best, best_fit = pop[best_i], fit[best_i]

        def record(gen: int):
            rec = GenerationRecord(gen, best_fit, float(sum(fit)) / len(fit), evaluate.evaluations)
            history.records.append(rec)
            if progress is not None:
                progress(rec)

        record(0)
        for gen in range(1, cfg.generations + 1):
            left = budget - evaluate.evaluations
            if left <= 0:
                break
            rng = np.random.default_rng(streams[gen])
            elite = min(range(len(pop)), key=lambda i: (fit[i], i))
            children: list[PinAssignment] = []
            want = min(cfg.population - 1, left)
            while len(children) < want:
                a = pop[_tournament(fit, cfg.tournament_size, rng)]
                b = pop[_tournament(fit, cfg.tournament_size, rng)]
                if rng.random() < cfg.crossover_prob:
                    a, b = crossover(a, b, rng)
                for child in (a, b):
                    if rng.random() < cfg.mutation_prob:
                        child = mutate(child, rng)
                    # steer away from genotypes already scored so the budget explores
                    for _ in range(NOVELTY_TRIES):
                        if child not in evaluate.cache and child not in children:
                            break
                        child = mutate(child, rng)
                    children.append(child)
            children = children[:want]
            child_fit = evaluate(children)
            pop = [pop[elite]] + children
            fit = [fit[elite]] + child_fit
            for g, f in zip(children, child_fit):
                if f < best_fit:
                    best, best_fit = g, f
            record(gen)
    return best, history


def random_search(functions: Sequence[TruthTable], count: int, seed: int = 0, jobs: int = 1,
                  fitness: Optional[Callable[[PinAssignment], Fraction]] = None
                  ) -> tuple[PinAssignment, list[Fraction]]:
    """Evaluate ``count`` uniform random genotypes; returns the best and every area."""
    _check_functions(functions)
    if count < 1:
        raise ValueError("count must be at least 1")
    n = len(functions)
    m, p = functions[0].num_inputs, functions[0].num_outputs
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    genotypes = [random_assignment(n, m, p, rng) for _ in range(count)]
    with Evaluator(functions, jobs, fitness) as evaluate:
        areas = evaluate(genotypes)
    best = min(range(count), key=lambda i: (areas[i], i))
    return genotypes[best], areas


def histogram_csv(areas: Sequence[Fraction]) -> str:
    counts: dict[Fraction, int] = {}
    for a in areas:
        counts[a] = counts.get(a, 0) + 1
    lines = ["area_ge,count"]
    lines += [f"{float(a):.2f},{c}" for a, c in sorted(counts.items())]
    return "\n".join(lines) + "\n"
