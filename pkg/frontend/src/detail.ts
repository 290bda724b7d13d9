/**
 * Defect detail pane: transition level diagram, PL spectrum with a gamma
 * control that refetches from the API, polarization dial, and download
 * links.  Pure render helpers are exported for testing; all numbers come
 * straight from API payloads.
 */

import { DefectApi, DefectDetail, SpectrumResponse, TransitionPayload } from "./api.js";
import { el, svg, svgText, clear, fmt } from "./dom.js";
import { RequestGate } from "./requests.js";

/** Level diagram from record data: ground and relaxed excited totals per
 * spin channel, arrows labeled with the ZPL. */
export function levelDiagram(detail: DefectDetail): SVGElement {
  const width = 280;
  const height = 180;
  const diagram = svg("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "level-diagram",
    role: "img",
  });
  const channels: ("up" | "down")[] = ["up", "down"];
  const maxZpl = Math.max(0.1, ...detail.transitions.map((t) => t.zpl));
  channels.forEach((channel, column) => {
    const x0 = 30 + column * 130;
    const x1 = x0 + 90;
    const yGround = height - 30;
    diagram.append(
      svg("line", { x1: String(x0), y1: String(yGround), x2: String(x1), y2: String(yGround), class: "level ground" }),
      svgText(`spin ${channel}`, { x: String(x0), y: String(height - 8), class: "channel-label" }),
    );
    const transitions = detail.transitions.filter((t) => t.spin_channel === channel);
    for (const t of transitions) {
      const yExcited = yGround - (t.zpl / maxZpl) * (height - 70);
      const xMid = (x0 + x1) / 2;
      diagram.append(
        svg("line", { x1: String(x0), y1: String(yExcited), x2: String(x1), y2: String(yExcited), class: "level excited" }),
        svg("line", {
          x1: String(xMid), y1: String(yExcited), x2: String(xMid), y2: String(yGround),
          class: "transition-arrow", "marker-end": "url(#arrow)",
        }),
        svgText(`${fmt(t.zpl)} eV`, { x: String(xMid + 6), y: String((yExcited + yGround) / 2), class: "zpl-label" }),
      );
    }
    if (!transitions.length) {
      diagram.append(svgText("no transition", { x: String(x0), y: String(yGround - 16), class: "channel-empty" }));
    }
  });
  return diagram;
}

/** Line plot of a PL spectrum payload. */
export function spectrumPlot(spectrum: SpectrumResponse): SVGElement {
  const width = 420;
  const height = 200;
  const pad = 34;
  const { energies_ev: xs, intensities: ys } = spectrum;
  const xMin = xs[0];
  const xMax = xs[xs.length - 1];
  const yMax = Math.max(...ys, 1e-12);
  const points = xs
    .map((x, i) => {
      const px = pad + ((x - xMin) / (xMax - xMin)) * (width - 2 * pad);
      const py = height - pad - (ys[i] / yMax) * (height - 2 * pad);
      return `${px.toFixed(2)},${py.toFixed(2)}`;
    })
    .join(" ");
  const plot = svg("svg", { viewBox: `0 0 ${width} ${height}`, class: "spectrum-plot", role: "img" });
  plot.append(
    svg("polyline", { points, class: "spectrum-line", fill: "none" }),
    svgText(`${fmt(xMin)} eV`, { x: String(pad), y: String(height - 10), class: "axis-label" }),
    svgText(`${fmt(xMax)} eV`, { x: String(width - pad - 30), y: String(height - 10), class: "axis-label" }),
    svgText(`ZPL ${fmt(spectrum.zpl_ev)} eV, γ=${fmt(spectrum.gamma_ev)} eV`, {
      x: String(pad), y: "16", class: "plot-title",
    }),
  );
  return plot;
}

/** Dial showing excitation/emission polarization angles in the 0-60° fold. */
export function polarizationDial(t: TransitionPayload): SVGElement {
  const size = 150;
  const cx = size / 2;
  const cy = size - 20;
  const radius = size / 2 - 10;
  const dial = svg("svg", { viewBox: `0 0 ${size} ${size}`, class: "polarization-dial", role: "img" });
  const arc = (deg: number) => {
    const rad = (Math.PI / 180) * deg;
    return { x: cx + radius * Math.cos(rad), y: cy - radius * Math.sin(rad) };
  };
  const end = arc(60);
  dial.append(
    svg("path", {
      d: `M ${cx + radius} ${cy} A ${radius} ${radius} 0 0 0 ${end.x} ${end.y} L ${cx} ${cy} Z`,
      class: "dial-wedge",
    }),
  );
  const needle = (angle: number | null, cls: string, label: string) => {
    if (angle === null) {
      dial.append(svgText(`${label}: out of plane`, { x: "8", y: cls === "exc" ? "14" : "28", class: `needle-label ${cls}` }));
      return;
    }
    const tip = arc(angle);
    dial.append(
      svg("line", { x1: String(cx), y1: String(cy), x2: String(tip.x), y2: String(tip.y), class: `needle ${cls}` }),
      svgText(`${label} ${fmt(angle)}°`, { x: "8", y: cls === "exc" ? "14" : "28", class: `needle-label ${cls}` }),
    );
  };
  needle(t.excitation_polarization_deg, "exc", "excitation");
  needle(t.emission_polarization_deg, "em", "emission");
  if (t.misalignment_deg !== null) {
    dial.append(svgText(`misalignment ${fmt(t.misalignment_deg)}°`, { x: "8", y: "42", class: "needle-label" }));
  }
  return dial;
}

export function transitionSummary(t: TransitionPayload): HTMLElement {
  const rows: [string, string][] = [
    ["spin channel", t.spin_channel],
    ["ZPL", `${fmt(t.zpl)} eV (${fmt(t.zpl_nm)} nm)`],
    ["radiative rate", `${fmt(t.radiative_rate)} 1/s`],
    ["radiative lifetime", `${fmt(t.radiative_lifetime)} s`],
    ["non-radiative rate", t.nonradiative_rate === null ? "—" : `${fmt(t.nonradiative_rate)} 1/s`],
    ["quantum efficiency", fmt(t.quantum_efficiency)],
    ["visibility (exc/em)", `${fmt(t.visibility_exc)} / ${fmt(t.visibility_em)}`],
  ];
  const table = el("table", { class: "summary-table" });
  for (const [key, value] of rows) {
    table.append(el("tr", {}, [el("th", {}, [key]), el("td", {}, [value])]));
  }
  return table;
}

export interface DetailOptions {
  gammaDefault?: number;
}

export class DetailPane {
  readonly root: HTMLElement;
  private readonly gate = new RequestGate<SpectrumResponse | null>();
  private current: DefectDetail | null = null;
  private gammaEv: number;

  constructor(
    private readonly api: DefectApi,
    options: DetailOptions = {},
  ) {
    this.gammaEv = options.gammaDefault ?? 0.005;
    this.root = el("div", { class: "detail-pane", "data-role": "detail" });
  }

  async show(defectId: string): Promise<void> {
    const detail = await this.api.getDefect(defectId);
    this.current = detail;
    this.render(detail);
    await this.loadSpectrum(detail, 0);
  }

  private render(detail: DefectDetail): void {
    clear(this.root);
    const heading = el("h2", {}, [detail.id]);
    const meta = el("p", { class: "detail-meta" }, [
      `charge ${detail.charge}, ${detail.spin_multiplicity}, ` +
        `group ${detail.host_group ?? "—"}, elements: ${detail.elements.join(", ") || "none"}`,
    ]);
    const downloads = el("p", { class: "downloads" }, [
      el("a", { href: this.api.structureUrl(detail.id, "xyz"), download: `${detail.id}.xyz` }, ["structure (XYZ)"]),
      " · ",
      el("a", { href: this.api.structureUrl(detail.id, "cif"), download: `${detail.id}.cif` }, ["structure (CIF)"]),
    ]);
    this.root.append(heading, meta, levelDiagram(detail), downloads);
    detail.transitions.forEach((t, i) => {
      this.root.append(
        el("h3", {}, [`transition ${i} (spin ${t.spin_channel})`]),
        transitionSummary(t),
        polarizationDial(t),
        el("div", { class: "spectrum-slot", "data-role": `spectrum-${i}` }),
      );
    });
  }

  private async loadSpectrum(detail: DefectDetail, index: number): Promise<void> {
    const slot = this.root.querySelector(`[data-role="spectrum-${index}"]`);
    if (!slot) return;
    const transition = detail.transitions[index];
    if (!transition || transition.hr_ref === null) {
      slot.append(el("p", { class: "no-spectrum" }, ["no phonon data: spectrum unavailable"]));
      return;
    }
    const key = `${detail.id}:${index}:${this.gammaEv}`;
    const spectrum = await this.gate.run(key, () =>
      this.api.spectrum(detail.id, index, this.gammaEv),
    );
    if (spectrum === null || !spectrum) return;
    clear(slot);
    const gammaSlider = el("input", {
      type: "range", min: "0.001", max: "0.02", step: "0.001",
      value: String(this.gammaEv), "data-role": "gamma-slider",
    }) as HTMLInputElement;
    gammaSlider.addEventListener("input", () => {
      this.gammaEv = Number(gammaSlider.value);
      if (this.current) void this.loadSpectrum(this.current, index);
    });
    slot.append(
      spectrumPlot(spectrum),
      el("label", { class: "gamma-control" }, ["broadening γ (eV) ", gammaSlider]),
      el("p", {}, [
        el("a", { href: this.api.spectrumCsvUrl(detail.id, index, this.gammaEv) }, ["spectrum (CSV)"]),
      ]),
    );
  }
}
