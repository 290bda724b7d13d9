/** Application shell: identify wizard + detail pane + browse/stats tabs. */

import { DefectApi, HistogramResponse } from "./api.js";
import { histogramChart } from "./charts.js";
import { DetailPane } from "./detail.js";
import { el, clear } from "./dom.js";
import { RequestGate } from "./requests.js";
import { Wizard, WizardOptions } from "./wizard.js";

export interface AppOptions extends WizardOptions {
  baseUrl?: string;
}

export interface App {
  wizard: Wizard;
  detail: DetailPane;
  root: HTMLElement;
}

export function initApp(root: HTMLElement, options: AppOptions = {}): App {
  const api = new DefectApi(options.baseUrl ?? "");
  const detail = new DetailPane(api);
  const wizard = new Wizard(api, {
    debounceMs: options.debounceMs,
    limit: options.limit,
    onSelect: (id) => {
      void detail.show(id);
      options.onSelect?.(id);
    },
  });

  const identifyTab = el("section", { class: "tab identify-tab" }, [
    el("h1", {}, ["Identify a defect"]),
    el("p", { class: "hint" }, [
      "Enter observed properties one at a time; the candidate list narrows as each is added.",
    ]),
    wizard.root,
    detail.root,
  ]);

  const statsGate = new RequestGate<HistogramResponse>();
  const chartSlot = el("div", { class: "chart-slot", "data-role": "chart" });
  const propertySelect = el("select", { "data-role": "histogram-property" }, [
    el("option", { value: "zpl" }, ["ZPL"]),
    el("option", { value: "lifetime" }, ["radiative lifetime"]),
    el("option", { value: "misalignment" }, ["polarization misalignment"]),
  ]) as HTMLSelectElement;
  const loadChart = async () => {
    const property = propertySelect.value;
    const report = await statsGate.run(property, () => api.histogram(property));
    if (report === null) return;
    clear(chartSlot);
    chartSlot.append(histogramChart(report));
  };
  propertySelect.addEventListener("change", () => void loadChart());
  const browseTab = el("section", { class: "tab browse-tab hidden" }, [
    el("h1", {}, ["Distributions"]),
    el("p", {}, [propertySelect]),
    chartSlot,
  ]);

  const identifyButton = el("button", { "data-role": "tab-identify", class: "active" }, ["identify"]);
  const browseButton = el("button", { "data-role": "tab-browse" }, ["browse"]);
  identifyButton.addEventListener("click", () => {
    identifyTab.classList.remove("hidden");
    browseTab.classList.add("hidden");
    identifyButton.classList.add("active");
    browseButton.classList.remove("active");
  });
  browseButton.addEventListener("click", () => {
    browseTab.classList.remove("hidden");
    identifyTab.classList.add("hidden");
    browseButton.classList.add("active");
    identifyButton.classList.remove("active");
    void loadChart();
  });

  root.append(el("nav", { class: "tabs" }, [identifyButton, browseButton]), identifyTab, browseTab);
  return { wizard, detail, root };
}

declare global {
  interface Window {
    defectdbApp?: App;
  }
}

if (typeof document !== "undefined") {
  const mount = document.getElementById("app");
  if (mount) window.defectdbApp = initApp(mount);
}
