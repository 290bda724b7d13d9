/**
 * Identification wizard: an incrementally edited signature form whose
 * enabled criteria are POSTed (debounced) to /identify, with the ranked
 * candidate list narrowing live as observations are added.
 */

import { DefectApi, IdentifyResponse, MatchPayload, SignaturePayload } from "./api.js";
import { debounce } from "./debounce.js";
import { el, clear, fmt } from "./dom.js";
import { RequestGate } from "./requests.js";

export const PICKER_ELEMENTS = ["C", "O", "Si", "S", "Ge", "Al", "P", "As", "Se", "Sn", "Sb"];

export interface SignatureFormState {
  zplEnabled: boolean;
  zplEv: number;
  zplToleranceEv: number;
  lifetimeEnabled: boolean;
  lifetimeMinExp: number; // log10 seconds
  lifetimeMaxExp: number;
  visibilityEnabled: boolean;
  visibilityMin: number;
  misalignmentEnabled: boolean;
  misalignmentMaxDeg: number;
  spin: string; // "" = any
  charge: string; // "" = any
  elements: string[];
}

export function defaultFormState(): SignatureFormState {
  return {
    zplEnabled: false,
    zplEv: 2.0,
    zplToleranceEv: 0.4,
    lifetimeEnabled: false,
    lifetimeMinExp: -9,
    lifetimeMaxExp: -6,
    visibilityEnabled: false,
    visibilityMin: 0.5,
    misalignmentEnabled: false,
    misalignmentMaxDeg: 10,
    spin: "",
    charge: "",
    elements: [],
  };
}

/** Enabled criteria as an API payload, or null when none are enabled. */
export function buildSignature(state: SignatureFormState): SignaturePayload | null {
  const payload: SignaturePayload = {};
  if (state.zplEnabled) {
    payload.zpl_ev = state.zplEv;
    payload.zpl_tolerance_ev = state.zplToleranceEv;
  }
  if (state.lifetimeEnabled) {
    payload.lifetime_min_s = 10 ** Math.min(state.lifetimeMinExp, state.lifetimeMaxExp);
    payload.lifetime_max_s = 10 ** Math.max(state.lifetimeMinExp, state.lifetimeMaxExp);
  }
  if (state.visibilityEnabled) payload.visibility_min = state.visibilityMin;
  if (state.misalignmentEnabled) payload.misalignment_max_deg = state.misalignmentMaxDeg;
  if (state.spin) payload.spin_multiplicity = state.spin;
  if (state.charge) payload.charge = Number(state.charge);
  if (state.elements.length) payload.must_contain_elements = [...state.elements].sort();
  return Object.keys(payload).length ? payload : null;
}

export function countCriteria(state: SignatureFormState): number {
  let n = 0;
  if (state.zplEnabled) n += 1;
  if (state.lifetimeEnabled) n += 1;
  if (state.visibilityEnabled) n += 1;
  if (state.misalignmentEnabled) n += 1;
  if (state.spin) n += 1;
  if (state.charge) n += 1;
  if (state.elements.length) n += 1;
  return n;
}

export interface WizardOptions {
  debounceMs?: number;
  limit?: number;
  onSelect?: (defectId: string) => void;
}

export class Wizard {
  readonly state = defaultFormState();
  readonly root: HTMLElement;
  private readonly listNode: HTMLElement;
  private readonly statusNode: HTMLElement;
  private readonly gate = new RequestGate<IdentifyResponse>();
  private readonly scheduleSearch: () => void;
  private readonly options: WizardOptions;
  lastMatches: MatchPayload[] = [];

  constructor(
    private readonly api: DefectApi,
    options: WizardOptions = {},
  ) {
    this.options = options;
    this.root = el("div", { class: "wizard" });
    this.statusNode = el("p", { class: "status", "data-role": "status" });
    this.listNode = el("div", { class: "candidates", "data-role": "candidates" });
    this.scheduleSearch = debounce(() => void this.search(), options.debounceMs ?? 300);
    this.buildForm();
    this.root.append(this.statusNode, this.listNode);
    this.refresh();
  }

  /** Apply a state change from any input and kick the debounced search. */
  update(change: Partial<SignatureFormState>): void {
    Object.assign(this.state, change);
    this.refresh();
  }

  private refresh(): void {
    const signature = buildSignature(this.state);
    if (!signature) {
      this.statusNode.textContent = "Enable at least one observed property to search.";
      clear(this.listNode);
      return;
    }
    this.statusNode.textContent = "Searching…";
    this.scheduleSearch();
  }

  private async search(): Promise<void> {
    const signature = buildSignature(this.state);
    if (!signature) return;
    if (this.options.limit) signature.limit = this.options.limit;
    try {
      const result = await this.gate.run(JSON.stringify(signature), () => this.api.identify(signature));
      if (result === null) return; // a newer edit superseded this response
      this.lastMatches = result.matches;
      this.renderMatches(result);
    } catch (error) {
      this.statusNode.textContent = `Search failed: ${(error as Error).message} (retry by editing a field)`;
    }
  }

  private renderMatches(result: IdentifyResponse): void {
    this.statusNode.textContent = `${result.total} candidate transition(s)`;
    clear(this.listNode);
    const table = el("table", { class: "match-table" });
    table.append(
      el("tr", {}, [
        el("th", {}, ["defect"]),
        el("th", {}, ["ZPL (eV)"]),
        el("th", {}, ["ΔZPL (eV)"]),
        el("th", {}, ["lifetime (s)"]),
        el("th", {}, ["criteria"]),
      ]),
    );
    for (const match of result.matches) {
      const row = el("tr", { class: "match-row", "data-defect-id": match.defect_id });
      row.append(
        el("td", {}, [match.defect_id]),
        el("td", {}, [fmt(match.zpl_ev)]),
        el("td", {}, [fmt(match.score.zpl_distance_ev)]),
        el("td", {}, [fmt(match.radiative_lifetime_s)]),
        el("td", {}, [String(match.score.criteria_satisfied)]),
      );
      row.addEventListener("click", () => this.options.onSelect?.(match.defect_id));
      table.append(row);
    }
    this.listNode.append(table);
  }

  private criterionRow(
    label: string,
    enabledAttr: keyof SignatureFormState,
    inputs: HTMLElement[],
  ): HTMLElement {
    const checkbox = el("input", {
      type: "checkbox",
      "data-role": `${String(enabledAttr)}`,
    }) as HTMLInputElement;
    checkbox.addEventListener("change", () => {
      this.update({ [enabledAttr]: checkbox.checked } as Partial<SignatureFormState>);
    });
    return el("div", { class: "criterion" }, [
      el("label", { class: "criterion-toggle" }, [checkbox, label]),
      el("span", { class: "criterion-inputs" }, inputs),
    ]);
  }

  private numberInput(
    role: string,
    value: number,
    apply: (v: number) => Partial<SignatureFormState>,
    attrs: Record<string, string> = {},
  ): HTMLInputElement {
    const input = el("input", { type: "number", value: String(value), "data-role": role, ...attrs }) as HTMLInputElement;
    input.addEventListener("input", () => {
      const parsed = Number(input.value);
      if (Number.isFinite(parsed)) this.update(apply(parsed));
    });
    return input;
  }

  private buildForm(): void {
    const zplValue = this.numberInput("zpl-value", this.state.zplEv, (v) => ({ zplEv: v }), {
      step: "0.01",
      min: "0.1",
    });
    const zplTol = el("input", {
      type: "range",
      min: "0.05",
      max: "1.0",
      step: "0.05",
      value: String(this.state.zplToleranceEv),
      "data-role": "zpl-tolerance",
    }) as HTMLInputElement;
    const tolLabel = el("span", { "data-role": "zpl-tolerance-label" }, [`±${this.state.zplToleranceEv} eV`]);
    zplTol.addEventListener("input", () => {
      const v = Number(zplTol.value);
      tolLabel.textContent = `±${v} eV`;
      this.update({ zplToleranceEv: v });
    });

    const lifeMin = this.numberInput("lifetime-min-exp", this.state.lifetimeMinExp, (v) => ({ lifetimeMinExp: v }), { min: "-12", max: "-2", step: "1" });
    const lifeMax = this.numberInput("lifetime-max-exp", this.state.lifetimeMaxExp, (v) => ({ lifetimeMaxExp: v }), { min: "-12", max: "-2", step: "1" });

    const visMin = el("input", {
      type: "range", min: "0", max: "1", step: "0.05",
      value: String(this.state.visibilityMin), "data-role": "visibility-min",
    }) as HTMLInputElement;
    visMin.addEventListener("input", () => this.update({ visibilityMin: Number(visMin.value) }));

    const misMax = el("input", {
      type: "range", min: "0", max: "30", step: "1",
      value: String(this.state.misalignmentMaxDeg), "data-role": "misalignment-max",
    }) as HTMLInputElement;
    misMax.addEventListener("input", () => this.update({ misalignmentMaxDeg: Number(misMax.value) }));

    const spin = el("select", { "data-role": "spin" }, [
      el("option", { value: "" }, ["any spin"]),
      el("option", { value: "singlet" }, ["singlet"]),
      el("option", { value: "doublet" }, ["doublet"]),
      el("option", { value: "triplet" }, ["triplet"]),
    ]) as HTMLSelectElement;
    spin.addEventListener("change", () => this.update({ spin: spin.value }));

    const charge = el("select", { "data-role": "charge" }, [
      el("option", { value: "" }, ["any charge"]),
      el("option", { value: "-1" }, ["-1"]),
      el("option", { value: "0" }, ["0"]),
      el("option", { value: "1" }, ["+1"]),
    ]) as HTMLSelectElement;
    charge.addEventListener("change", () => this.update({ charge: charge.value }));

    const picker = el("span", { class: "element-picker" });
    for (const element of PICKER_ELEMENTS) {
      const box = el("input", { type: "checkbox", "data-role": `element-${element}` }) as HTMLInputElement;
      box.addEventListener("change", () => {
        const set = new Set(this.state.elements);
        if (box.checked) set.add(element);
        else set.delete(element);
        this.update({ elements: [...set] });
      });
      picker.append(el("label", { class: "element-option" }, [box, element]));
    }

    this.root.append(
      el("div", { class: "form" }, [
        this.criterionRow("ZPL", "zplEnabled", [zplValue, el("span", {}, [" eV, tolerance "]), zplTol, tolLabel]),
        this.criterionRow("lifetime 10^", "lifetimeEnabled", [lifeMin, el("span", {}, [" to 10^"]), lifeMax, el("span", {}, [" s"])]),
        this.criterionRow("min visibility", "visibilityEnabled", [visMin]),
        this.criterionRow("max misalignment (deg)", "misalignmentEnabled", [misMax]),
        el("div", { class: "criterion" }, [el("span", { class: "criterion-toggle" }, ["spin / charge"]), spin, charge]),
        el("div", { class: "criterion" }, [el("span", { class: "criterion-toggle" }, ["must contain"]), picker]),
      ]),
    );
  }
}
