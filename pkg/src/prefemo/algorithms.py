"""The nine generational optimizers behind one engine interface.

Baselines: NSGA-III (non-dominated sorting plus reference-line niching),
IBEA (additive epsilon-indicator fitness), MOEA/D (Tchebycheff decomposition
with neighborhood mating and capped replacement).

Preference-driven: R-NSGA-II (weighted-distance ranking with epsilon
clearing), r-NSGA-II (r-dominance sorting), g-NSGA-II (aspiration-flag
sorting), PBEA (preference-scaled indicator fitness), RMEAD2 (MOEA/D with
weight resampling around the best subproblem), MOEA/D-NUMS (MOEA/D over
weights biased toward the reference point's simplex projection).

Every run owns a single RNG stream seeded at construction, so identical
seeds give bit-identical results. Populations of the three strongest
preference kinds keep their best achieved reference-point accuracy from one
generation to the next via a one-slot elite guard.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Population,
    Solution,
    crowding_distance,
    dominance_matrix,
    fronts_from_dominance,
    nondominated_fronts,
    objective_matrix,
)
from .problems import ProblemSpec, evaluate_batch
from .scalarize import (
    ReferencePoint,
    WeightSet,
    augmented_asf,
    augmented_asf_matrix,
    nums_transform,
    rmead2_resample,
    tchebycheff,
    uniform_weights,
    weighted_distance_matrix,
)
from .variation import polynomial_mutation, sbx_crossover

BASELINE_KINDS = ("nsga3", "ibea", "moead")
PREFERENCE_KINDS = ("r_nsga2", "rdom_nsga2", "g_nsga2", "pbea", "rmead2", "moead_nums")
ALGORITHM_KINDS = BASELINE_KINDS + PREFERENCE_KINDS
DECOMPOSITION_KINDS = ("moead", "rmead2", "moead_nums")

# Kinds whose best reference-point accuracy is protected by the elite guard.
GUARDED_KINDS = ("r_nsga2", "pbea", "moead_nums")

DISPLAY_NAMES = {
    "nsga3": "NSGA-III",
    "ibea": "IBEA",
    "moead": "MOEA/D",
    "r_nsga2": "R-NSGA-II",
    "rdom_nsga2": "r-NSGA-II",
    "g_nsga2": "g-NSGA-II",
    "pbea": "PBEA",
    "rmead2": "RMEAD2",
    "moead_nums": "MOEA/D-NUMS",
}


class ConfigError(ValueError):
    """An algorithm or run configuration failed validation."""


@dataclass(frozen=True)
class AlgorithmSpec:
    """Configuration of one optimizer kind plus its variation settings."""

    kind: str
    population_size: int = 100
    eta_c: float = 20.0
    eta_m: float = 20.0
    p_c: float = 0.9
    p_m: float | None = None  # None -> 1/n at run time
    kappa: float = 0.05  # indicator fitness scaling (ibea, pbea)
    sigma: float = 0.05  # pbea specificity
    rho_aug: float = 1e-4  # augmentation coefficient of the ASF
    epsilon_clear: float = 0.01  # r_nsga2 clearing radius (normalized space)
    delta: float = 0.3  # rdom_nsga2 comparability threshold
    neighborhood_size: int = 20  # moead family
    replacement_cap: int = 2  # max neighbors replaced per offspring
    roi_extent: float = 0.3  # moead_nums mapping extent (tau)
    nums_kappa: float = 2.0  # moead_nums nonuniformity exponent
    rmead2_radius: float = 0.5  # initial resampling radius
    rmead2_radius_floor: float = 1e-3
    rmead2_stagnation: int = 10  # generations without progress before halving
    reference_points: tuple[ReferencePoint, ...] = ()

    def __post_init__(self):
        if self.kind not in ALGORITHM_KINDS:
            raise ConfigError(f"unknown algorithm kind {self.kind!r}")
        if self.population_size < 2:
            raise ConfigError("population size must be at least 2")
        if not 0.0 <= self.p_c <= 1.0:
            raise ConfigError("p_c must lie in [0, 1]")
        if self.p_m is not None and not 0.0 <= self.p_m <= 1.0:
            raise ConfigError("p_m must lie in [0, 1]")
        if self.kappa <= 0 or self.sigma <= 0:
            raise ConfigError("kappa and sigma must be positive")
        if self.rho_aug < 0 or self.epsilon_clear < 0:
            raise ConfigError("rho_aug and epsilon_clear must be nonnegative")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")
        if not 0.0 < self.roi_extent <= 1.0:
            raise ConfigError("roi_extent must lie in (0, 1]")
        if self.nums_kappa < 1.0:
            raise ConfigError("nums_kappa must be >= 1")
        if self.rmead2_radius <= 0 or self.rmead2_radius_floor <= 0:
            raise ConfigError("resampling radii must be positive")
        refs = tuple(self.reference_points)
        object.__setattr__(self, "reference_points", refs)
        if self.kind in PREFERENCE_KINDS and not refs:
            raise ConfigError(f"{self.kind} requires at least one reference point")
        if self.kind in BASELINE_KINDS and refs:
            raise ConfigError(f"{self.kind} is a baseline and takes no reference points")

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.kind]


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    evaluations: int
    metrics: dict = field(default_factory=dict)


@dataclass
class RunResult:
    """Outcome of one run: final population, trajectory, and bookkeeping."""

    final_population: Population
    records: tuple[GenerationRecord, ...]
    seed: int
    wall_clock_s: float


def epsilon_indicator_matrix(F: np.ndarray) -> np.ndarray:
    """Pairwise additive epsilon indicator: out[a, b] = max_i (F[a,i] - F[b,i])."""
    return (F[:, None, :] - F[None, :, :]).max(axis=2)


def ibea_fitness(F, kappa: float) -> np.ndarray:
    """Indicator-based fitness: F(x) = sum over others of -exp(-I(x', x)/kappa).

    Operates on raw objective values; a singleton population scores 0.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[np.newaxis, :]
    n = F.shape[0]
    if n == 1:
        return np.zeros(1)
    E = np.exp(-epsilon_indicator_matrix(F) / kappa)
    np.fill_diagonal(E, 0.0)
    return -E.sum(axis=0)


def pbea_indicator(
    fa,
    fb,
    F_pop,
    zr: ReferencePoint,
    sigma: float,
    rho_aug: float,
    w: np.ndarray | None = None,
) -> float:
    """Preference-scaled epsilon indicator between two solutions.

    The plain indicator of the pair is divided by the first argument's
    achievement value, shifted so the population's best achieves exactly
    sigma; small sigma therefore amplifies contributions of solutions near
    the reference point.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    F_pop = np.asarray(F_pop, dtype=float)
    s_all = augmented_asf_matrix(F_pop, zr, w=w, rho_aug=rho_aug)
    s_a = augmented_asf(fa, zr, w=w, rho_aug=rho_aug)
    return float((fa - fb).max() / (s_a + sigma - s_all.min()))


def rnsga2_select(F, refs, epsilon_clear: float, N: int) -> list[int]:
    """Reference-point environmental selection over an (M, m) matrix.

    Whole non-dominated fronts are admitted while they fit. Within a front,
    each member is sorted by weighted distance per reference point and
    keeps its best position over the set (so with many reference points
    every point pulls its own closest solutions forward, which is what lets
    a large reference set cover the whole front). The boundary front then
    passes an epsilon-clearing pass: of each group of mutually
    epsilon-close solutions (normalized space) only the best-ranked member
    survives, and cleared ones are readmitted in rank order only if
    capacity remains.

    Returns:
        Selected row indices, best-first within each front.
    """
    F = np.asarray(F, dtype=float)
    if not refs:
        raise ValueError("need at least one reference point")
    if N > F.shape[0]:
        raise ValueError("cannot select more members than provided")
    fmin = F.min(axis=0)
    fmax = F.max(axis=0)
    D = np.column_stack([weighted_distance_matrix(F, zr, fmin, fmax) for zr in refs])
    span = fmax - fmin
    Fn = np.where(span > 0, (F - fmin) / np.where(span > 0, span, 1.0), 0.0)

    def rank_front(front: list[int]) -> list[int]:
        sub = D[front]
        pos = np.empty_like(sub, dtype=int)
        for r in range(sub.shape[1]):
            order = np.argsort(sub[:, r], kind="stable")
            pos[order, r] = np.arange(len(front))
        pref_rank = pos.min(axis=1)
        nearest = sub.min(axis=1)
        keys = sorted(
            range(len(front)), key=lambda k: (pref_rank[k], nearest[k], front[k])
        )
        return [front[k] for k in keys]

    selected: list[int] = []
    for front in nondominated_fronts(F):
        ordered = rank_front(front)
        if len(selected) + len(front) <= N:
            selected.extend(ordered)
            if len(selected) == N:
                break
            continue
        capacity = N - len(selected)
        survivors: list[int] = []
        cleared: list[int] = []
        for i in ordered:
            close = any(
                np.linalg.norm(Fn[i] - Fn[j]) <= epsilon_clear for j in survivors
            )
            (cleared if close else survivors).append(i)
        selected.extend(survivors[:capacity])
        if len(survivors) < capacity:
            selected.extend(cleared[: capacity - len(survivors)])
        break
    return selected


def moead_replacement(
    F: np.ndarray,
    child_f: np.ndarray,
    neighbors: np.ndarray,
    weights: np.ndarray,
    ideal: np.ndarray,
    cap: int,
    rng: np.random.Generator,
    value_fn=None,
) -> list[int]:
    """Indices of neighbor subproblems the child takes over (at most cap).

    Neighbors are visited in a random order; the child replaces an incumbent
    only when it improves that subproblem's scalarized value (the
    Tchebycheff value against the ideal point unless value_fn overrides it).
    """
    if value_fn is None:
        value_fn = lambda f, w: tchebycheff(f, w, ideal)
    replaced: list[int] = []
    for j in rng.permutation(neighbors):
        j = int(j)
        if value_fn(child_f, weights[j]) < value_fn(F[j], weights[j]):
            replaced.append(j)
            if len(replaced) >= cap:
                break
    return replaced


def _fill_by_fronts(fronts: list[list[int]], F: np.ndarray, N: int) -> list[int]:
    """NSGA-II style truncation: whole fronts, boundary by crowding."""
    selected: list[int] = []
    for front in fronts:
        crowd = crowding_distance(F[front])
        order = sorted(range(len(front)), key=lambda k: (-crowd[k], front[k]))
        ordered = [front[k] for k in order]
        if len(selected) + len(front) <= N:
            selected.extend(ordered)
            if len(selected) == N:
                break
            continue
        selected.extend(ordered[: N - len(selected)])
        break
    return selected


def run(
    algo: AlgorithmSpec,
    problem: ProblemSpec,
    budget: int,
    seed: int,
    observer=None,
) -> RunResult:
    """Execute a full generational run within the evaluation budget."""
    engine = GenerationalEngine(algo, problem, budget, seed)
    started = time.perf_counter()
    if observer is not None:
        observer(engine.records[-1], engine.population)
    while engine.step():
        if observer is not None:
            observer(engine.records[-1], engine.population)
    return RunResult(
        final_population=engine.population,
        records=tuple(engine.records),
        seed=seed,
        wall_clock_s=time.perf_counter() - started,
    )


class GenerationalEngine:
    """Stepwise generational loop shared by the batch harness and the
    interactive steering service."""

    def __init__(self, algo: AlgorithmSpec, problem: ProblemSpec, budget: int, seed: int):
        if budget < algo.population_size:
            raise ConfigError("budget must cover at least the initial population")
        for zr in algo.reference_points:
            if zr.m != problem.m:
                raise ConfigError(
                    f"reference point dimension {zr.m} does not match problem m={problem.m}"
                )
        self.algo = algo
        self.problem = problem
        self.budget = budget
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.refs: list[ReferencePoint] = list(algo.reference_points)
        self._p_m = algo.p_m if algo.p_m is not None else 1.0 / problem.n

        N = algo.population_size
        X = problem.bounds.sample(self.rng, N)
        F = evaluate_batch(problem, X)
        self._ideal = F.min(axis=0)
        self._next_id = N
        members = [Solution(X[i], F[i], i) for i in range(N)]
        self.population = Population(members)
        self.evaluations = N
        self.generation = 0
        self.records: list[GenerationRecord] = []

        self._pos: np.ndarray | None = None
        if algo.kind in DECOMPOSITION_KINDS:
            base = uniform_weights(problem.m, N)
            self._base_weights = base.vectors
            if algo.kind == "moead_nums":
                self._weights = self._nums_weights()
            else:
                self._weights = np.array(base.vectors)
            self._rebuild_neighborhoods()
            self._radius = algo.rmead2_radius
            self._stag_best = np.inf
            self._stag_count = 0
        elif algo.kind == "nsga3":
            self._ref_dirs = uniform_weights(problem.m, N).vectors
        else:
            order = self._environmental_selection(list(self.population.members), N)
            self._set_positions(order, N)

        self._elite: Solution | None = None
        self._elite_ep = np.inf
        self._refresh_elite()
        self._record()

    # ------------------------------------------------------------------
    # public stepping interface

    def step(self) -> bool:
        """Advance one generation; False when the budget cannot cover it."""
        N = self.algo.population_size
        if self.evaluations + N > self.budget:
            return False
        if self.algo.kind in DECOMPOSITION_KINDS:
            self._step_decomposition()
        else:
            self._step_generational()
        self.generation += 1
        self._apply_elite_guard()
        self._refresh_elite()
        self._record()
        return True

    def set_reference_points(self, refs) -> None:
        """Swap the active reference points (elicitation path)."""
        if self.algo.kind in BASELINE_KINDS:
            raise ConfigError(f"{self.algo.kind} does not consume reference points")
        refs = [zr if isinstance(zr, ReferencePoint) else ReferencePoint(np.asarray(zr)) for zr in refs]
        if not refs:
            raise ConfigError("need at least one reference point")
        for zr in refs:
            if zr.m != self.problem.m:
                raise ConfigError("reference point dimension mismatch")
        self.refs = refs
        self._elite = None
        self._elite_ep = np.inf
        self._stag_best = np.inf
        self._stag_count = 0
        self._refresh_elite()

    # ------------------------------------------------------------------
    # bookkeeping

    def _record(self) -> None:
        metrics: dict = {}
        if len(self.refs) == 1:
            metrics["best_ep"] = self._population_ep()
        self.records.append(
            GenerationRecord(self.generation, self.evaluations, metrics)
        )

    def _population_ep(self) -> float:
        zr = self.refs[0]
        F = self.population.objectives()
        w = np.where(zr.weights == 0.0, 1e-6, zr.weights)
        return float(np.min(np.max((F - zr.z) / w, axis=1)))

    def _member_ep(self, f: np.ndarray) -> float:
        zr = self.refs[0]
        w = np.where(zr.weights == 0.0, 1e-6, zr.weights)
        return float(np.max((f - zr.z) / w))

    def _refresh_elite(self) -> None:
        if self.algo.kind not in GUARDED_KINDS or len(self.refs) != 1:
            return
        eps = [self._member_ep(s.f) for s in self.population.members]
        best = int(np.argmin(eps))
        if eps[best] < self._elite_ep:
            self._elite = self.population.members[best]
            self._elite_ep = eps[best]

    def _apply_elite_guard(self) -> None:
        """Reinsert the stored elite if the best accuracy regressed."""
        if self.algo.kind not in GUARDED_KINDS or len(self.refs) != 1:
            return
        if self._elite is None:
            return
        eps = [self._member_ep(s.f) for s in self.population.members]
        if min(eps) <= self._elite_ep + 1e-12:
            return
        worst = int(np.argmax(eps))
        members = list(self.population.members)
        members[worst] = self._elite
        self.population = Population(members, prior_ideal=self._ideal)

    def _new_solution(self, x: np.ndarray, f: np.ndarray) -> Solution:
        s = Solution(x, f, self._next_id)
        self._next_id += 1
        return s

    def _set_positions(self, order: list[int], size: int) -> None:
        pos = np.empty(size, dtype=int)
        pos[np.asarray(order, dtype=int)] = np.arange(len(order))
        self._pos = pos

    # ------------------------------------------------------------------
    # generational (dominance / indicator) kinds

    def _step_generational(self) -> None:
        N = self.algo.population_size
        X = self._make_offspring()
        F = evaluate_batch(self.problem, X)
        self._ideal = np.minimum(self._ideal, F.min(axis=0))
        self.evaluations += N
        children = [self._new_solution(X[i], F[i]) for i in range(N)]
        merged = list(self.population.members) + children
        if self.algo.kind == "nsga3":
            order = self._nsga3_select(merged, N)
        else:
            order = self._environmental_selection(merged, N)
        survivors = [merged[i] for i in order]
        # Survivors come back best-first, so position equals index.
        self._pos = np.arange(N)
        self.population = Population(survivors, prior_ideal=self._ideal)

    def _make_offspring(self) -> np.ndarray:
        N = self.algo.population_size
        members = self.population.members
        out: list[np.ndarray] = []
        if self.algo.kind == "nsga3":
            perm = self.rng.permutation(N)
            if N % 2:
                perm = np.append(perm, perm[0])
            pairs = perm.reshape(-1, 2)
        else:
            pairs = np.array(
                [[self._tournament(), self._tournament()] for _ in range((N + 1) // 2)]
            )
        for a, b in pairs:
            c1, c2 = sbx_crossover(
                members[a].x, members[b].x, self.algo.eta_c, self.algo.p_c,
                self.problem.bounds, self.rng,
            )
            out.append(polynomial_mutation(c1, self.algo.eta_m, self._p_m, self.problem.bounds, self.rng))
            out.append(polynomial_mutation(c2, self.algo.eta_m, self._p_m, self.problem.bounds, self.rng))
        return np.array(out[:N])

    def _tournament(self) -> int:
        N = self.algo.population_size
        i = int(self.rng.integers(N))
        j = int(self.rng.integers(N))
        if self._pos is None:
            return min(i, j)
        return i if self._pos[i] <= self._pos[j] else j

    def _environmental_selection(self, merged: list[Solution], N: int) -> list[int]:
        kind = self.algo.kind
        F = objective_matrix(merged)
        if kind == "r_nsga2":
            return rnsga2_select(F, self.refs, self.algo.epsilon_clear, N)
        if kind == "rdom_nsga2":
            return _fill_by_fronts(self._rdominance_fronts(F), F, N)
        if kind == "g_nsga2":
            return _fill_by_fronts(self._gdominance_fronts(F), F, N)
        if kind in ("ibea", "pbea"):
            return self._indicator_select(F, N)
        raise ConfigError(f"no environmental selection for kind {kind!r}")

    def _rdominance_fronts(self, F: np.ndarray) -> list[list[int]]:
        zr = self.refs[0]
        fmin = F.min(axis=0)
        fmax = F.max(axis=0)
        dist = weighted_distance_matrix(F, zr, fmin, fmax)
        spread = float(dist.max() - dist.min())
        pm = dominance_matrix(F)
        if spread > 0:
            equal = np.all(F[:, None, :] == F[None, :, :], axis=2)
            incomparable = ~pm & ~pm.T & ~equal
            ndiff = (dist[:, None] - dist[None, :]) / spread
            rdom = pm | (incomparable & (ndiff < -self.algo.delta))
        else:
            rdom = pm
        return fronts_from_dominance(rdom)

    def _gdominance_fronts(self, F: np.ndarray) -> list[list[int]]:
        zr = self.refs[0]
        flags = (np.all(F <= zr.z, axis=1) | np.all(F >= zr.z, axis=1)).astype(int)
        pm = dominance_matrix(F)
        gdom = (flags[:, None] > flags[None, :]) | ((flags[:, None] == flags[None, :]) & pm)
        return fronts_from_dominance(gdom)

    def _indicator_select(self, F: np.ndarray, N: int) -> list[int]:
        """Worst-out truncation under the (preference-) indicator fitness.

        Objectives are rescaled to [0, 1] over the pool and the indicator is
        normalized by its largest magnitude before exponentiation; both
        steps only stabilize the arithmetic, the ordering semantics follow
        the plain fitness definition.
        """
        total = F.shape[0]
        fmin = F.min(axis=0)
        span = F.max(axis=0) - fmin
        span = np.where(span > 0, span, 1.0)
        Fn = (F - fmin) / span
        I = epsilon_indicator_matrix(Fn)
        if self.algo.kind == "pbea":
            s = np.min(
                [
                    augmented_asf_matrix(
                        Fn,
                        ReferencePoint((zr.z - fmin) / span, zr.weights),
                        rho_aug=self.algo.rho_aug,
                    )
                    for zr in self.refs
                ],
                axis=0,
            )
            I = I / (s + self.algo.sigma - s.min())[:, None]
        scale = float(np.abs(I).max())
        if scale <= 0:
            scale = 1.0
        E = np.exp(-I / (scale * self.algo.kappa))
        np.fill_diagonal(E, 0.0)
        fitness = -E.sum(axis=0)
        alive = np.ones(total, dtype=bool)
        for _ in range(total - N):
            worst = int(np.argmin(np.where(alive, fitness, np.inf)))
            alive[worst] = False
            fitness[alive] += E[worst, alive]
        survivors = np.nonzero(alive)[0]
        order = sorted(range(survivors.size), key=lambda k: (-fitness[survivors[k]], k))
        return [int(survivors[k]) for k in order]

    # ------------------------------------------------------------------
    # NSGA-III

    def _nsga3_select(self, merged: list[Solution], N: int) -> list[int]:
        F = objective_matrix(merged)
        fronts = nondominated_fronts(F)
        selected: list[int] = []
        l = 0
        while len(selected) + len(fronts[l]) <= N:
            selected.extend(fronts[l])
            if len(selected) == N:
                return selected
            l += 1
        last = fronts[l]
        pool = selected + last
        normalized = self._nsga3_normalize(F[pool])
        dirs = self._ref_dirs
        unit = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        proj = normalized @ unit.T
        perp2 = (normalized**2).sum(axis=1, keepdims=True) - proj**2
        perp = np.sqrt(np.clip(perp2, 0.0, None))
        assoc = perp.argmin(axis=1)
        assoc_dist = perp[np.arange(len(pool)), assoc]

        counts = np.zeros(dirs.shape[0], dtype=int)
        for k in range(len(selected)):
            counts[assoc[k]] += 1
        candidates: dict[int, list[int]] = {}
        for k in range(len(selected), len(pool)):
            candidates.setdefault(int(assoc[k]), []).append(k)
        active = set(range(dirs.shape[0]))
        while len(selected) < N:
            pool_refs = np.array(sorted(active), dtype=int)
            min_count = counts[pool_refs].min()
            tied = pool_refs[counts[pool_refs] == min_count]
            j = int(tied[self.rng.integers(tied.size)])
            cands = candidates.get(j, [])
            if not cands:
                active.discard(j)
                continue
            if counts[j] == 0:
                pick = min(cands, key=lambda k: (assoc_dist[k], k))
            else:
                pick = cands[int(self.rng.integers(len(cands)))]
            cands.remove(pick)
            counts[j] += 1
            selected.append(pool[pick])
        return selected

    def _nsga3_normalize(self, F: np.ndarray) -> np.ndarray:
        m = F.shape[1]
        translated = F - self._ideal
        axis_weights = np.full((m, m), 1e-6)
        np.fill_diagonal(axis_weights, 1.0)
        intercepts = None
        asf = translated[:, None, :] / axis_weights[None, :, :]
        extreme_idx = asf.max(axis=2).argmin(axis=0)
        E = translated[extreme_idx]
        try:
            plane = np.linalg.solve(E, np.ones(m))
            if np.all(np.isfinite(plane)) and np.all(plane > 1e-9):
                intercepts = 1.0 / plane
        except np.linalg.LinAlgError:
            intercepts = None
        if intercepts is None or np.any(intercepts <= 1e-12):
            intercepts = translated.max(axis=0)
        intercepts = np.where(intercepts > 1e-12, intercepts, 1.0)
        return translated / intercepts

    # ------------------------------------------------------------------
    # decomposition kinds

    def _nums_weights(self) -> np.ndarray:
        # The same (ideal, nadir) scaling is used by the subproblem values,
        # so the pivot subproblem tracks the reference point exactly even
        # while the nadir estimate drifts.
        self._nums_span = np.maximum(self.population.nadir_est - self._ideal, 1e-12)
        transformed = nums_transform(
            WeightSet(self._base_weights),
            self.refs[0],
            tau=self.algo.roi_extent,
            kappa=self.algo.nums_kappa,
            ideal=self._ideal,
            nadir_est=self.population.nadir_est,
        )
        return np.array(transformed.vectors)

    def _subproblem_value(self, f: np.ndarray, w: np.ndarray) -> float:
        if self.algo.kind == "moead_nums":
            scaled = (f - self._ideal) / self._nums_span
            return tchebycheff(scaled, w, np.zeros_like(f))
        return tchebycheff(f, w, self._ideal)

    def _rebuild_neighborhoods(self) -> None:
        W = self._weights
        T = min(self.algo.neighborhood_size, W.shape[0])
        d2 = ((W[:, None, :] - W[None, :, :]) ** 2).sum(axis=2)
        self._neigh = np.argsort(d2, axis=1, kind="stable")[:, :T]

    def _step_decomposition(self) -> None:
        if self.algo.kind == "moead_nums":
            self._weights = self._nums_weights()
            self._rebuild_neighborhoods()
        N = self.algo.population_size
        members = list(self.population.members)
        F = self.population.objectives()
        W = self._weights
        cap = self.algo.replacement_cap
        for i in range(N):
            B = self._neigh[i]
            picks = self.rng.choice(B.size, size=2, replace=False)
            a, b = int(B[picks[0]]), int(B[picks[1]])
            child_x, _ = sbx_crossover(
                members[a].x, members[b].x, self.algo.eta_c, self.algo.p_c,
                self.problem.bounds, self.rng,
            )
            child_x = polynomial_mutation(
                child_x, self.algo.eta_m, self._p_m, self.problem.bounds, self.rng
            )
            child_f = evaluate_batch(self.problem, child_x[np.newaxis, :])[0]
            self.evaluations += 1
            self._ideal = np.minimum(self._ideal, child_f)
            winners = moead_replacement(
                F, child_f, B, W, self._ideal, cap, self.rng,
                value_fn=self._subproblem_value,
            )
            for j in winners:
                members[j] = self._new_solution(child_x, child_f)
                F[j] = child_f
        self.population = Population(members, prior_ideal=self._ideal)
        if self.algo.kind == "rmead2":
            self._rmead2_update(F)

    def _rmead2_update(self, F: np.ndarray) -> None:
        zr = self.refs[0]
        asf = augmented_asf_matrix(F, zr, rho_aug=self.algo.rho_aug)
        best_idx = int(np.argmin(asf))
        best_val = float(asf[best_idx])
        if best_val < self._stag_best - 1e-12:
            self._stag_best = best_val
            self._stag_count = 0
        else:
            self._stag_count += 1
            if self._stag_count >= self.algo.rmead2_stagnation:
                self._radius = max(self._radius / 2.0, self.algo.rmead2_radius_floor)
                self._stag_count = 0
        resampled = rmead2_resample(
            WeightSet(self._weights), self._weights[best_idx], self._radius, self.rng
        ).vectors.copy()
        # Keep the best weight attached to its own subproblem index.
        resampled[[0, best_idx]] = resampled[[best_idx, 0]]
        self._weights = resampled
        self._rebuild_neighborhoods()
