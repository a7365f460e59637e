import Papa from "papaparse";

/** Column set of the harness result CSV, in order. */
export const RESULT_COLUMNS = [
  "model", "gamma", "gamma2", "t0", "t1", "a", "b",
  "n_total", "n_conditioned", "mean_per_time", "sem_mean",
  "var_per_time", "sem_var", "lambda_theory", "dispersion",
  "seed", "method", "wall_time_s",
] as const;

export interface ResultRow {
  model: string;
  gamma: number;
  gamma2: number | null;
  t0: number;
  t1: number;
  a: number;
  b: number;
  n_total: number;
  n_conditioned: number;
  mean_per_time: number;
  sem_mean: number;
  var_per_time: number;
  sem_var: number;
  lambda_theory: number;
  dispersion: number | null;
  seed: number;
  method: string;
}

export interface TrajectoryPoint {
  time: number;
  state: number;
}

export class SchemaError extends Error {}

function num(v: string): number | null {
  if (v === undefined || v === null || v.trim() === "") return null;
  const x = Number(v);
  if (Number.isNaN(x)) throw new SchemaError(`not a number: ${JSON.stringify(v)}`);
  return x;
}

function requireNum(v: string, col: string): number {
  const x = num(v);
  if (x === null) throw new SchemaError(`missing value in column ${col}`);
  return x;
}

/** Parse the harness result CSV; the header must match the documented
 * schema exactly. An empty body is valid and yields no rows. */
export function parseResultCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse failure: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) throw new SchemaError("empty file: header row required");
  const header = rows[0];
  if (header.join(",") !== RESULT_COLUMNS.join(",")) {
    throw new SchemaError(
      `unexpected header: ${header.join(",")} (want ${RESULT_COLUMNS.join(",")})`);
  }
  return rows.slice(1).map((r) => {
    if (r.length !== RESULT_COLUMNS.length) {
      throw new SchemaError(`row has ${r.length} fields, want ${RESULT_COLUMNS.length}`);
    }
    const f: Record<string, string> = {};
    RESULT_COLUMNS.forEach((c, i) => (f[c] = r[i]));
    return {
      model: f.model,
      gamma: requireNum(f.gamma, "gamma"),
      gamma2: num(f.gamma2),
      t0: requireNum(f.t0, "t0"),
      t1: requireNum(f.t1, "t1"),
      a: requireNum(f.a, "a"),
      b: requireNum(f.b, "b"),
      n_total: requireNum(f.n_total, "n_total"),
      n_conditioned: requireNum(f.n_conditioned, "n_conditioned"),
      mean_per_time: requireNum(f.mean_per_time, "mean_per_time"),
      sem_mean: requireNum(f.sem_mean, "sem_mean"),
      var_per_time: requireNum(f.var_per_time, "var_per_time"),
      sem_var: requireNum(f.sem_var, "sem_var"),
      lambda_theory: requireNum(f.lambda_theory, "lambda_theory"),
      dispersion: num(f.dispersion),
      seed: requireNum(f.seed, "seed"),
      method: f.method,
    };
  });
}

/** Parse a trajectory dump (time,state). */
export function parseTrajectoryCsv(text: string): TrajectoryPoint[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse failure: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0 || rows[0].join(",") !== "time,state") {
    throw new SchemaError("trajectory file must start with header time,state");
  }
  return rows.slice(1).map((r) => ({
    time: requireNum(r[0], "time"),
    state: requireNum(r[1], "state"),
  }));
}
