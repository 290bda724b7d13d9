/** Stacked per-group histogram bars from the stats endpoint. */

import { HistogramResponse } from "./api.js";
import { svg, svgText } from "./dom.js";

const GROUP_ORDER = ["III", "IV", "V", "VI", "none"];
const GROUP_CLASS: Record<string, string> = {
  III: "bar-iii", IV: "bar-iv", V: "bar-v", VI: "bar-vi", none: "bar-none",
};

const AXIS_LABEL: Record<string, string> = {
  zpl: "ZPL (eV)",
  lifetime: "log10(lifetime / s)",
  misalignment: "misalignment (deg)",
};

export function histogramChart(report: HistogramResponse): SVGElement {
  const width = 480;
  const height = 240;
  const pad = 36;
  const chart = svg("svg", { viewBox: `0 0 ${width} ${height}`, class: "histogram", role: "img" });
  const bins = report.bin_edges.length - 1;
  if (bins < 1) {
    chart.append(svgText("no data", { x: String(width / 2 - 20), y: String(height / 2) }));
    return chart;
  }
  const groups = GROUP_ORDER.filter((g) => g in report.counts);
  const totals = Array.from({ length: bins }, (_, i) =>
    groups.reduce((acc, g) => acc + report.counts[g][i], 0),
  );
  const maxTotal = Math.max(...totals, 1);
  const barWidth = (width - 2 * pad) / bins;
  for (let i = 0; i < bins; i++) {
    let yTop = height - pad;
    for (const group of groups) {
      const count = report.counts[group][i];
      if (!count) continue;
      const barHeight = (count / maxTotal) * (height - 2 * pad);
      yTop -= barHeight;
      chart.append(
        svg("rect", {
          x: String(pad + i * barWidth + 1),
          y: String(yTop),
          width: String(Math.max(1, barWidth - 2)),
          height: String(barHeight),
          class: `bar ${GROUP_CLASS[group]}`,
          "data-group": group,
          "data-count": String(count),
        }),
      );
    }
  }
  chart.append(
    svgText(String(report.bin_edges[0]), { x: String(pad), y: String(height - 12), class: "axis-label" }),
    svgText(String(report.bin_edges[bins]), { x: String(width - pad - 24), y: String(height - 12), class: "axis-label" }),
    svgText(`${AXIS_LABEL[report.property] ?? report.property} — ${report.total} transitions`, {
      x: String(pad), y: "16", class: "plot-title",
    }),
  );
  let legendX = pad;
  for (const group of groups) {
    chart.append(
      svg("rect", { x: String(legendX), y: "24", width: "10", height: "10", class: `bar ${GROUP_CLASS[group]}` }),
      svgText(group, { x: String(legendX + 14), y: "33", class: "legend-label" }),
    );
    legendX += 56;
  }
  return chart;
}
