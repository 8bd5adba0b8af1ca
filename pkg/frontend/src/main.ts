/** Browser wiring: one session, live plots, and the preference form. */

import { populationChart, trajectoryChart } from "./charts.js";
import { SteerClient } from "./client.js";
import { validateReferencePoint } from "./form.js";
import { initialState, reduce } from "./reducer.js";
import type { ServerEvent, ViewState } from "./types.js";

let state: ViewState = initialState();
let client = new SteerClient("");
let sessionId: string | null = null;
let stopStream: (() => void) | null = null;
let submitting = false;

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function dispatch(event: ServerEvent): void {
  state = reduce(state, event);
  render();
}

function senseLabel(sense: string): string {
  return sense === "max" ? "maximize (stored negated)" : "minimize";
}

function render(): void {
  $("connection").textContent = state.connection;
  $("phase").textContent = state.phase ?? "-";
  $("banner").textContent = state.banner ?? "";
  ($("banner") as HTMLElement).style.display = state.banner ? "block" : "none";

  const snap = state.snapshot;
  if (snap) {
    $("generation").textContent = String(snap.generation);
    $("evaluations").textContent = String(snap.evaluations);
    const display = snap.objectives;
    const reference =
      snap.reference_point === null
        ? null
        : snap.reference_point.map((v, j) => (snap.senses[j] === "max" ? -v : v));
    $("population").innerHTML = populationChart(display, snap.senses.length, {
      representative: snap.representative,
      reference,
    });
    $("trajectory").innerHTML = trajectoryChart(state.trajectory, {
      elicitationGenerations: state.elicitations.map((e) => e.generation),
    });
    const metric = snap.metrics.r_hv;
    $("rhv").textContent = metric === undefined ? "-" : metric.toPrecision(6);
  }

  const form = $("preference-form") as HTMLFormElement;
  const rows = $("fields");
  if (state.form.fields.length !== rows.childElementCount) {
    rows.innerHTML = "";
    state.form.fields.forEach((value, j) => {
      const row = document.createElement("label");
      row.className = "field-row";
      row.textContent = `z${j + 1} — ${senseLabel(state.form.senses[j] ?? "min")}: `;
      const input = document.createElement("input");
      input.name = `z${j}`;
      input.value = value;
      const err = document.createElement("span");
      err.className = "field-error";
      row.appendChild(input);
      row.appendChild(err);
      rows.appendChild(row);
    });
  }
  const inputs = Array.from(rows.querySelectorAll("input"));
  inputs.forEach((input, j) => {
    const message = state.form.errors?.fields[j] ?? null;
    (input.nextElementSibling as HTMLElement).textContent = message ?? "";
  });
  (form.querySelector("button") as HTMLButtonElement).disabled =
    !state.form.enabled || submitting;
  $("arity-error").textContent = state.form.errors?.arity ?? "";
  $("advance").toggleAttribute("disabled", state.phase !== "Running");
}

async function createSession(): Promise<void> {
  const preset = ($("preset") as HTMLInputElement).value.trim();
  const algorithm = ($("algorithm") as HTMLInputElement).value.trim() || "r_nsga2";
  const seed = Number(($("seed") as HTMLInputElement).value) || 0;
  stopStream?.();
  state = initialState();
  try {
    const created = await client.createSession({ preset, algorithm, seed });
    sessionId = created.session_id;
    $("session-id").textContent = sessionId;
    stopStream = client.streamSnapshots(sessionId, dispatch);
  } catch (err) {
    dispatch({ kind: "error", message: String(err) });
  }
  render();
}

async function advance(): Promise<void> {
  if (!sessionId) return;
  try {
    const snap = await client.advance(sessionId);
    dispatch({ kind: "snapshot", snapshot: snap });
  } catch (err) {
    dispatch({ kind: "error", message: String(err) });
  }
}

async function submitPreference(event: Event): Promise<void> {
  event.preventDefault();
  if (!sessionId || !state.snapshot || submitting) return;
  const inputs = Array.from($("fields").querySelectorAll("input"));
  const outcome = validateReferencePoint(
    inputs.map((i) => i.value),
    state.snapshot.senses.length,
  );
  if (!outcome.ok) {
    state = { ...state, form: { ...state.form, errors: outcome.errors } };
    render();
    return;
  }
  submitting = true;
  render();
  try {
    await client.submitPreference(sessionId, outcome.z);
    dispatch({ kind: "phase", phase: "Running", generation: state.snapshot.generation });
    await advance();
  } catch (err) {
    dispatch({ kind: "error", message: String(err) });
  } finally {
    submitting = false;
    render();
  }
}

export function boot(): void {
  client = new SteerClient("");
  $("create").addEventListener("click", () => void createSession());
  $("advance").addEventListener("click", () => void advance());
  ($("preference-form") as HTMLFormElement).addEventListener(
    "submit",
    (ev) => void submitPreference(ev),
  );
  render();
}

if (typeof document !== "undefined" && document.getElementById("create")) {
  boot();
}
