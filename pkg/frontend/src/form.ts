/** Reference-point form validation.
 *
 * Every objective needs one finite numeric value (minimization orientation,
 * matching the wire protocol); nothing is sent unless all fields pass.
 */

import type { FormErrors } from "./types.js";

export type ValidationResult =
  | { ok: true; z: number[] }
  | { ok: false; errors: FormErrors };

export function validateReferencePoint(fields: string[], m: number): ValidationResult {
  if (fields.length !== m) {
    return {
      ok: false,
      errors: {
        arity: `expected ${m} values, got ${fields.length}`,
        fields: fields.map(() => null),
      },
    };
  }
  const errors: (string | null)[] = fields.map((raw) => {
    const text = raw.trim();
    if (text === "") return "required";
    const value = Number(text);
    if (Number.isNaN(value)) return "not a number";
    if (!Number.isFinite(value)) return "must be finite";
    return null;
  });
  if (errors.some((e) => e !== null)) {
    return { ok: false, errors: { fields: errors } };
  }
  return { ok: true, z: fields.map((raw) => Number(raw.trim())) };
}
