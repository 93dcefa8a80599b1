/** Experiment-specific figure definitions over the tidy CSV. */
import {
  CsvSchemaError,
  extractSeries,
  experimentOf,
  parseTidyCsv,
  type Series,
  type TidyRow,
} from "./csv.js";
import { renderChart } from "./svg.js";

export const KNOWN_EXPERIMENTS = ["range", "population", "revenue", "convergence"] as const;
export type ExperimentName = (typeof KNOWN_EXPERIMENTS)[number];

function rangeFigure(rows: TidyRow[]): string {
  const series = extractSeries(rows, "avg_su_utility_eur", (r) => r.method);
  return renderChart({
    title: "Average SU utility vs transmission range",
    xLabel: "transmission range (m)",
    yLabel: "average SU utility (EUR)",
    series: orderSeries(series, ["proposed", "random"]),
  });
}

function populationFigure(rows: TidyRow[]): string {
  const series = extractSeries(rows, "sbs_count", (r) => r.variant);
  return renderChart({
    title: "SUs transmitting to the SBS vs population size",
    xLabel: "number of SUs",
    yLabel: "SUs at the SBS (count)",
    series,
  });
}

function revenueFigure(rows: TidyRow[]): string {
  const cdna = extractSeries(rows, "cdna_revenue_eur", (r) => `cdna ${r.variant}`);
  const sbs = extractSeries(rows, "sbs_revenue_eur", (r) => `sbs ${r.variant}`);
  return renderChart({
    title: "Operator revenue: trading vs overage",
    xLabel: "transmission range (m)",
    yLabel: "operator revenue (EUR)",
    series: [...cdna, ...sbs],
  });
}

function convergenceFigure(rows: TidyRow[]): string {
  const series: Series[] = [];
  for (const metric of ["swap_count", "rounds", "price_rounds"]) {
    try {
      for (const s of extractSeries(rows, metric, () => metric)) {
        series.push(s);
      }
    } catch (err) {
      if (!(err instanceof CsvSchemaError)) throw err;
    }
  }
  if (series.length === 0) {
    throw new CsvSchemaError("no convergence metrics in CSV");
  }
  return renderChart({
    title: "Matching effort vs population size",
    xLabel: "number of SUs",
    yLabel: "iterations (count)",
    series,
  });
}

function orderSeries(series: Series[], preferred: string[]): Series[] {
  const rank = (s: Series) => {
    const i = preferred.indexOf(s.label);
    return i === -1 ? preferred.length : i;
  };
  return [...series].sort((a, b) => rank(a) - rank(b) || a.label.localeCompare(b.label));
}

export function renderFigure(csvText: string, experiment: string): string {
  if (!KNOWN_EXPERIMENTS.includes(experiment as ExperimentName)) {
    throw new CsvSchemaError(
      `unknown experiment "${experiment}"; expected one of ${KNOWN_EXPERIMENTS.join(", ")}`,
    );
  }
  const rows = parseTidyCsv(csvText);
  const inCsv = experimentOf(rows);
  if (inCsv !== experiment) {
    throw new CsvSchemaError(`CSV holds experiment "${inCsv}", not "${experiment}"`);
  }
  switch (experiment as ExperimentName) {
    case "range":
      return rangeFigure(rows);
    case "population":
      return populationFigure(rows);
    case "revenue":
      return revenueFigure(rows);
    case "convergence":
      return convergenceFigure(rows);
  }
}
