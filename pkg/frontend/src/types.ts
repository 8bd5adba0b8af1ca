/** Wire types mirroring the steering service and the client view model. */

export type Phase = "Running" | "AwaitingPreference" | "Finished";

export type Sense = "min" | "max";

export type ConnectionStatus = "idle" | "connecting" | "open" | "closed" | "error";

/** One per-generation snapshot as delivered by the server.
 *  Objective rows are in native display orientation (maximized objectives
 *  un-negated); reference points stay in minimization orientation. */
export interface Snapshot {
  generation: number;
  evaluations: number;
  phase: Phase;
  objectives: number[][];
  senses: Sense[];
  representative: number[];
  metrics: { ep?: number; r_hv?: number };
  reference_point: number[] | null;
}

export interface SessionInfo {
  session_id: string;
  problem: string;
  algorithm: string;
  budget: number;
  interaction_period: number;
  total_generations: number;
}

export interface Elicitation {
  generation: number;
  z: number[];
}

export interface TrajectoryPoint {
  generation: number;
  value: number;
  referenceVersion: number;
}

/** Events applied to the view state, a discriminated union over everything
 *  the server push channel (or the local connection machinery) can say. */
export type ServerEvent =
  | { kind: "snapshot"; snapshot: Snapshot }
  | { kind: "phase"; phase: Phase; generation: number }
  | { kind: "error"; message: string }
  | { kind: "connection"; status: ConnectionStatus };

export interface FormState {
  /** One text field per objective, prefilled with the previous z^r. */
  fields: string[];
  senses: Sense[];
  enabled: boolean;
  errors: FormErrors | null;
}

export interface FormErrors {
  arity?: string;
  fields: (string | null)[];
}

export interface ViewState {
  connection: ConnectionStatus;
  snapshot: Snapshot | null;
  phase: Phase | null;
  m: number | null;
  form: FormState;
  elicitations: Elicitation[];
  trajectory: TrajectoryPoint[];
  referenceVersion: number;
  banner: string | null;
}
