/** Pure state transition for the steering view.
 *
 * Replaying a recorded event log through `reduce` yields an identical final
 * state, which is what the tests pin down. Stale snapshots (lower generation
 * than the current one) are discarded; a snapshot with the same generation
 * but a new phase is the pause/finish flip and is applied.
 */

import type {
  Elicitation,
  FormState,
  Phase,
  ServerEvent,
  Snapshot,
  TrajectoryPoint,
  ViewState,
} from "./types.js";

export function initialState(): ViewState {
  return {
    connection: "idle",
    snapshot: null,
    phase: null,
    m: null,
    form: { fields: [], senses: [], enabled: false, errors: null },
    elicitations: [],
    trajectory: [],
    referenceVersion: 0,
    banner: null,
  };
}

function sameVector(a: number[] | null, b: number[] | null): boolean {
  if (a === null || b === null) return a === b;
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

function formFor(snapshot: Snapshot, enabled: boolean): FormState {
  return {
    fields: (snapshot.reference_point ?? new Array(snapshot.senses.length).fill(0)).map(
      (v) => String(v),
    ),
    senses: snapshot.senses,
    enabled,
    errors: null,
  };
}

function applySnapshot(state: ViewState, snapshot: Snapshot): ViewState {
  const current = state.snapshot;
  if (current) {
    if (snapshot.generation < current.generation) return state; // stale
    if (snapshot.generation === current.generation && snapshot.phase === current.phase) {
      return state; // duplicate delivery (the feed is at-least-once)
    }
  }

  let referenceVersion = state.referenceVersion;
  let elicitations: Elicitation[] = state.elicitations;
  const prevRef = current?.reference_point ?? null;
  if (snapshot.reference_point !== null && !sameVector(prevRef, snapshot.reference_point)) {
    if (prevRef !== null) referenceVersion += 1;
    elicitations = [
      ...elicitations,
      { generation: snapshot.generation, z: snapshot.reference_point },
    ];
  }

  let trajectory: TrajectoryPoint[] = state.trajectory;
  const last = trajectory[trajectory.length - 1];
  if (snapshot.metrics.r_hv !== undefined && (!last || snapshot.generation > last.generation)) {
    trajectory = [
      ...trajectory,
      { generation: snapshot.generation, value: snapshot.metrics.r_hv, referenceVersion },
    ];
  }

  const awaiting = snapshot.phase === "AwaitingPreference";
  return {
    ...state,
    snapshot,
    phase: snapshot.phase,
    m: snapshot.senses.length,
    form: awaiting ? formFor(snapshot, true) : { ...state.form, enabled: false },
    elicitations,
    trajectory,
    referenceVersion,
    banner: state.banner,
  };
}

function applyPhase(state: ViewState, phase: Phase, generation: number): ViewState {
  if (state.snapshot && generation < state.snapshot.generation) return state; // stale
  const awaiting = phase === "AwaitingPreference";
  return {
    ...state,
    phase,
    form:
      awaiting && state.snapshot
        ? formFor(state.snapshot, true)
        : { ...state.form, enabled: false },
  };
}

export function reduce(state: ViewState, event: ServerEvent): ViewState {
  switch (event.kind) {
    case "snapshot":
      return applySnapshot(state, event.snapshot);
    case "phase":
      return applyPhase(state, event.phase, event.generation);
    case "error":
      // banner only; plots and history stay on screen
      return { ...state, banner: event.message };
    case "connection":
      return { ...state, connection: event.status };
    default:
      return state;
  }
}

export function replay(events: ServerEvent[], from?: ViewState): ViewState {
  return events.reduce(reduce, from ?? initialState());
}
