"""Interactive steering sessions: run, pause, elicit, resume.

A session wraps one generational engine. It runs segments of generations and
pauses at fixed interaction boundaries (every ``interaction_period``
generations), where the decision maker inspects a snapshot and submits a
revised reference point; the new point applies from the next generation, so
the engine loop stays deterministic and a recorded (seed, elicitation
script) pair replays bit-identically.

Objective values inside snapshots are reported in native orientation
(maximized objectives un-negated) together with a per-objective sense tag;
reference points on the wire stay in minimization orientation, matching the
rest of the system.
"""

from __future__ import annotations

import json
import os
import queue
import threading
import uuid
from dataclasses import asdict, dataclass

import numpy as np

from .algorithms import (
    AlgorithmSpec,
    ConfigError,
    GenerationalEngine,
    PREFERENCE_KINDS,
)
from .harness import instance_reference, problem_from_config, session_presets
from .metrics import ep_accuracy, r_hv
from .problems import ProblemSpec
from .scalarize import ReferencePoint, augmented_asf_matrix

RUNNING = "Running"
AWAITING = "AwaitingPreference"
FINISHED = "Finished"

DEFAULT_REPRESENTATIVE_K = 5


class ProtocolError(RuntimeError):
    """An operation arrived in the wrong phase or with bad arguments."""

    def __init__(self, message: str, phase: str | None = None):
        super().__init__(message)
        self.phase = phase


class UnknownSessionError(KeyError):
    pass


def representative_subset(F, k: int, zr: ReferencePoint) -> list[int]:
    """Pick k representative member indices of an objective matrix.

    Greedy farthest-point selection seeded with the member achieving the
    best augmented scalarizing value against the reference point; k covering
    the whole set returns every index.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("population must be non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    n = F.shape[0]
    if k >= n:
        return list(range(n))
    chosen = [int(np.argmin(augmented_asf_matrix(F, zr)))]
    dist = np.linalg.norm(F - F[chosen[0]], axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(F - F[nxt], axis=1))
    return chosen


@dataclass(frozen=True)
class Snapshot:
    generation: int
    evaluations: int
    phase: str
    objectives: list  # display orientation (maximized objectives un-negated)
    senses: list
    representative: list
    metrics: dict
    reference_point: list | None  # minimization orientation

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SessionState:
    session_id: str
    problem: str
    algorithm: str
    phase: str
    generation: int
    evaluations: int
    budget: int
    interaction_period: int
    total_generations: int
    reference_point: list | None
    elicitations: list  # [{"generation": g, "z": [...]}]
    r_hv_trajectory: list  # [{"generation": g, "value": v, "reference_version": k}]
    snapshot: dict

    def to_dict(self) -> dict:
        return asdict(self)


class Session:
    """One optimization worker plus its interaction bookkeeping.

    The operation lock serializes advance/elicit; snapshot state sits behind
    a short-lived mutex so reads never wait on a running segment.
    """

    def __init__(
        self,
        problem: ProblemSpec,
        algorithm: AlgorithmSpec,
        budget: int,
        seed: int,
        interaction_period: int | None = None,
        representative_k: int = DEFAULT_REPRESENTATIVE_K,
        delta_extent: float = 0.2,
        session_id: str | None = None,
    ):
        self.id = session_id or uuid.uuid4().hex
        self.problem = problem
        self.algorithm = algorithm
        self.budget = budget
        self.seed = seed
        self.representative_k = representative_k
        self.delta_extent = delta_extent
        self._op_lock = threading.RLock()
        self._snap_lock = threading.Lock()

        self.engine = GenerationalEngine(algorithm, problem, budget, seed)
        N = algorithm.population_size
        self.total_generations = max(0, (budget - N) // N)
        if interaction_period is None:
            interaction_period = max(1, self.total_generations // 3)
        if interaction_period < 1:
            raise ConfigError("interaction_period must be >= 1")
        self.interaction_period = interaction_period

        self.phase = RUNNING
        self.reference_version = 0
        self.current_zr: ReferencePoint | None = (
            algorithm.reference_points[0] if algorithm.reference_points else None
        )
        self.elicitations: list[dict] = []
        if self.current_zr is not None:
            self.elicitations.append({"generation": 0, "z": self.current_zr.z.tolist()})
        self.trajectory: list[dict] = []
        self._worst = instance_reference(problem, None)
        self.journal: list[dict] = [
            {
                "event": "created",
                "schema_version": 1,
                "problem": problem.instance_id,
                "algorithm": algorithm.kind,
                "population_size": N,
                "budget": budget,
                "interaction_period": self.interaction_period,
                "seed": seed,
            }
        ]
        self._subscribers: list[queue.Queue] = []
        self._last_snapshot: Snapshot | None = None
        self._emit_snapshot(new_generation=True)

    # -------------------------------------------------------------- helpers

    def _display(self, F: np.ndarray) -> np.ndarray:
        signs = np.array([-1.0 if s == "max" else 1.0 for s in self.problem.senses])
        return F * signs

    def _metrics(self, F: np.ndarray) -> dict:
        if self.current_zr is None:
            return {}
        return {
            "ep": ep_accuracy(F, self.current_zr),
            "r_hv": r_hv(
                F, self.current_zr, self.delta_extent, self._worst, mc_seed=self.seed
            ),
        }

    def _emit_snapshot(self, new_generation: bool) -> Snapshot:
        F = self.engine.population.objectives()
        metrics = self._metrics(F)
        if self.current_zr is not None:
            rep = representative_subset(F, self.representative_k, self.current_zr)
        else:
            rep = list(range(min(self.representative_k, F.shape[0])))
        snap = Snapshot(
            generation=self.engine.generation,
            evaluations=self.engine.evaluations,
            phase=self.phase,
            objectives=self._display(F).tolist(),
            senses=list(self.problem.senses),
            representative=rep,
            metrics=metrics,
            reference_point=None if self.current_zr is None else self.current_zr.z.tolist(),
        )
        with self._snap_lock:
            if new_generation and metrics:
                self.trajectory.append(
                    {
                        "generation": snap.generation,
                        "value": metrics["r_hv"],
                        "reference_version": self.reference_version,
                    }
                )
            self.journal.append({"event": "snapshot", **snap.to_dict()})
            self._last_snapshot = snap
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(snap)
        return snap

    def _next_boundary(self) -> int | None:
        nxt = (self.engine.generation // self.interaction_period + 1) * self.interaction_period
        return nxt if nxt <= self.total_generations else None

    # ------------------------------------------------------------ protocol

    def advance(self) -> Snapshot:
        """Run until the next interaction boundary or budget exhaustion."""
        with self._op_lock:
            if self.phase != RUNNING:
                raise ProtocolError(
                    f"advance requires phase {RUNNING}, session is {self.phase}", self.phase
                )
            boundary = self._next_boundary()
            while True:
                if not self.engine.step():
                    with self._snap_lock:
                        self.phase = FINISHED
                    snap = self._emit_snapshot(new_generation=False)
                    with self._snap_lock:
                        self.journal.append(
                            {"event": "finished", "generation": self.engine.generation}
                        )
                        subscribers = list(self._subscribers)
                        self._subscribers.clear()
                    for q in subscribers:
                        q.put(None)
                    return snap
                at_boundary = boundary is not None and self.engine.generation >= boundary
                if at_boundary:
                    with self._snap_lock:
                        self.phase = AWAITING
                snap = self._emit_snapshot(new_generation=True)
                if at_boundary:
                    return snap

    def elicit(self, z) -> dict:
        with self._op_lock:
            if self.phase != AWAITING:
                raise ProtocolError(
                    f"elicit requires phase {AWAITING}, session is {self.phase}", self.phase
                )
            z = np.asarray(z, dtype=float)
            if z.shape != (self.problem.m,):
                raise ProtocolError(
                    f"reference point must have {self.problem.m} components, got {tuple(z.shape)}",
                    self.phase,
                )
            if not np.all(np.isfinite(z)):
                raise ProtocolError("reference point must be finite", self.phase)
            zr = ReferencePoint(z)
            if self.algorithm.kind in PREFERENCE_KINDS:
                self.engine.set_reference_points([zr])
            # baseline kinds accept the point for scoring only: search is blind
            with self._snap_lock:
                self.current_zr = zr
                self.reference_version += 1
                self.elicitations.append(
                    {"generation": self.engine.generation, "z": z.tolist()}
                )
                self.journal.append(
                    {
                        "event": "preference",
                        "generation": self.engine.generation,
                        "z": z.tolist(),
                    }
                )
                self.phase = RUNNING
            return {
                "accepted": True,
                "generation": self.engine.generation,
                "reference_version": self.reference_version,
            }

    def snapshot(self) -> Snapshot:
        with self._snap_lock:
            return self._last_snapshot

    def state(self) -> SessionState:
        with self._snap_lock:
            return SessionState(
                session_id=self.id,
                problem=self.problem.instance_id,
                algorithm=self.algorithm.kind,
                phase=self.phase,
                generation=self._last_snapshot.generation,
                evaluations=self._last_snapshot.evaluations,
                budget=self.budget,
                interaction_period=self.interaction_period,
                total_generations=self.total_generations,
                reference_point=None if self.current_zr is None else self.current_zr.z.tolist(),
                elicitations=list(self.elicitations),
                r_hv_trajectory=list(self.trajectory),
                snapshot=self._last_snapshot.to_dict(),
            )

    def subscribe(self):
        """Ordered snapshot feed: journal backlog first, then live events.

        Delivery is at-least-once; generations are monotone, repeating only
        when the phase flips on an unchanged generation (pause/finish).
        """
        q: queue.Queue = queue.Queue(maxsize=4096)
        with self._snap_lock:
            backlog = [e for e in self.journal if e["event"] == "snapshot"]
            finished = self.phase == FINISHED
            if not finished:
                self._subscribers.append(q)

        def feed():
            last = (-1, "")
            for entry in backlog:
                key = (entry["generation"], entry["phase"])
                if key[0] > last[0] or (key[0] == last[0] and key[1] != last[1]):
                    last = key
                    yield {k: v for k, v in entry.items() if k != "event"}
            if finished:
                return
            try:
                while True:
                    snap = q.get()
                    if snap is None:
                        return
                    key = (snap.generation, snap.phase)
                    if key[0] > last[0] or (key[0] == last[0] and key[1] != last[1]):
                        last = key
                        yield snap.to_dict()
            finally:
                with self._snap_lock:
                    if q in self._subscribers:
                        self._subscribers.remove(q)

        return feed()


class SessionManager:
    """In-memory registry of sessions, with optional journal persistence."""

    def __init__(self, journal_dir: str | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.journal_dir = journal_dir
        if journal_dir:
            os.makedirs(journal_dir, exist_ok=True)

    def create_session(
        self,
        problem: ProblemSpec,
        algorithm: AlgorithmSpec,
        budget: int,
        seed: int,
        interaction_period: int | None = None,
        representative_k: int = DEFAULT_REPRESENTATIVE_K,
        delta_extent: float = 0.2,
    ) -> str:
        session = Session(
            problem,
            algorithm,
            budget,
            seed,
            interaction_period=interaction_period,
            representative_k=representative_k,
            delta_extent=delta_extent,
        )
        with self._lock:
            self._sessions[session.id] = session
        return session.id

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def advance(self, session_id: str) -> Snapshot:
        session = self.get(session_id)
        snap = session.advance()
        if snap.phase == FINISHED:
            self._persist(session)
        return snap

    def elicit(self, session_id: str, z) -> dict:
        return self.get(session_id).elicit(z)

    def get_snapshot(self, session_id: str) -> Snapshot:
        return self.get(session_id).snapshot()

    def state(self, session_id: str) -> SessionState:
        return self.get(session_id).state()

    def stream(self, session_id: str):
        return self.get(session_id).subscribe()

    def _persist(self, session: Session) -> None:
        if not self.journal_dir:
            return
        path = os.path.join(self.journal_dir, f"{session.id}.ndjson")
        with open(path, "w", encoding="utf-8") as fh:
            for entry in session.journal:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")


def preset_session_args(preset_name: str, algorithm_kind: str) -> dict:
    """Problem/algorithm/budget settings for a named session preset."""
    presets = session_presets()
    if preset_name not in presets:
        raise ConfigError(
            f"unknown session preset {preset_name!r}; available: {', '.join(sorted(presets))}"
        )
    preset = presets[preset_name]
    problem = problem_from_config(preset["problem"])
    sizes = preset["population_size"]
    pop = (
        sizes["decomposition"]
        if algorithm_kind in ("moead", "rmead2", "moead_nums")
        else sizes["default"]
    )
    script = [np.array(z, dtype=float) for z in preset["script"]]
    refs = (ReferencePoint(script[0]),) if algorithm_kind in PREFERENCE_KINDS else ()
    # stiffer crossover distribution recommended for the portfolio models
    algorithm = AlgorithmSpec(
        kind=algorithm_kind, population_size=pop, eta_c=30.0, reference_points=refs
    )
    return {
        "problem": problem,
        "algorithm": algorithm,
        "budget": int(preset["budget"]),
        "script": script,
    }


def run_scripted_session(
    manager: SessionManager,
    problem: ProblemSpec,
    algorithm: AlgorithmSpec,
    budget: int,
    seed: int,
    script,
    interaction_period: int | None = None,
) -> SessionState:
    """Drive a session headlessly: the script supplies each elicitation.

    The first script entry doubles as the creation-time reference when the
    algorithm spec already carries it; remaining entries are submitted at
    successive pauses. An exhausted script re-submits the current point,
    which keeps the phase machine moving without changing preference.
    """
    sid = manager.create_session(
        problem, algorithm, budget, seed, interaction_period=interaction_period
    )
    session = manager.get(sid)
    pending = [np.asarray(z, dtype=float) for z in script]
    if (
        algorithm.reference_points
        and pending
        and np.allclose(pending[0], algorithm.reference_points[0].z)
    ):
        pending = pending[1:]  # creation already applied the first entry
    while True:
        snap = manager.advance(sid)
        if snap.phase == FINISHED:
            break
        if pending:
            manager.elicit(sid, pending.pop(0))
        elif session.current_zr is not None:
            manager.elicit(sid, session.current_zr.z)
        else:
            manager.elicit(sid, np.zeros(problem.m))
    return manager.state(sid)
