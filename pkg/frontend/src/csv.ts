/**
 * Tidy-CSV access layer for the experiment results.
 *
 * The simulator emits long-format rows; aggregate rows (empty seed column)
 * carry `<metric>_mean` / `<metric>_ci95` pairs computed across seeds. The
 * renderer is strictly a view over those aggregates: nothing is recomputed
 * from the per-seed rows.
 */
import Papa from "papaparse";

export const EXPECTED_COLUMNS = [
  "experiment",
  "grid_param",
  "grid_value",
  "variant",
  "seed",
  "method",
  "metric",
  "value",
  "scenario_hash",
  "build_id",
] as const;

export interface TidyRow {
  experiment: string;
  grid_param: string;
  grid_value: number;
  variant: string;
  seed: string;
  method: string;
  metric: string;
  value: number;
}

export interface SeriesPoint {
  x: number;
  mean: number;
  ci95: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export class CsvSchemaError extends Error {}

export function parseTidyCsv(text: string): TidyRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvSchemaError(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const expected = [...EXPECTED_COLUMNS];
  if (fields.length !== expected.length || expected.some((c, i) => fields[i] !== c)) {
    throw new CsvSchemaError(
      `unexpected CSV header: got [${fields.join(", ")}], want [${expected.join(", ")}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new CsvSchemaError("CSV contains no data rows");
  }
  return parsed.data.map((raw, index) => {
    const gridValue = Number(raw.grid_value);
    const value = Number(raw.value);
    if (!Number.isFinite(gridValue)) {
      throw new CsvSchemaError(`row ${index + 2}: grid_value ${raw.grid_value!} is not numeric`);
    }
    return {
      experiment: raw.experiment!,
      grid_param: raw.grid_param!,
      grid_value: gridValue,
      variant: raw.variant!,
      seed: raw.seed ?? "",
      method: raw.method!,
      metric: raw.metric!,
      value,
    };
  });
}

export function experimentOf(rows: TidyRow[]): string {
  const names = new Set(rows.map((r) => r.experiment));
  if (names.size !== 1) {
    throw new CsvSchemaError(`expected a single experiment per CSV, found: ${[...names].join(", ")}`);
  }
  return rows[0].experiment;
}

/**
 * Aggregate rows for `metric` grouped into series. The key function decides
 * how rows split into legend entries (by method, variant, or both).
 */
export function extractSeries(
  rows: TidyRow[],
  metric: string,
  keyOf: (row: TidyRow) => string,
): Series[] {
  const meanRows = rows.filter((r) => r.seed === "" && r.metric === `${metric}_mean`);
  const ciRows = rows.filter((r) => r.seed === "" && r.metric === `${metric}_ci95`);
  if (meanRows.length === 0) {
    throw new CsvSchemaError(`no aggregate rows for metric ${metric}`);
  }
  const ciIndex = new Map<string, number>();
  for (const row of ciRows) {
    ciIndex.set(`${keyOf(row)}@${row.grid_value}`, row.value);
  }
  const groups = new Map<string, SeriesPoint[]>();
  for (const row of meanRows) {
    const key = keyOf(row);
    if (!groups.has(key)) {
      groups.set(key, []);
    }
    groups.get(key)!.push({
      x: row.grid_value,
      mean: row.value,
      ci95: ciIndex.get(`${key}@${row.grid_value}`) ?? 0,
    });
  }
  return [...groups.entries()]
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([label, points]) => ({
      label,
      points: points.sort((p, q) => p.x - q.x),
    }));
}
