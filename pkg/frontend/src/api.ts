/**
 * Typed client for the defect database API (/api/v1).
 *
 * The UI never computes physics: every number it renders comes out of one
 * of these response payloads.
 */

export interface DipolePayload {
  mu_x: [number, number];
  mu_y: [number, number];
  mu_z: [number, number];
  mu_sq: number;
}

export interface TransitionPayload {
  index: number;
  spin_channel: "up" | "down";
  excited_total_energy: number;
  zpl: number;
  zpl_nm: number;
  radiative_rate: number;
  radiative_lifetime: number | "inf";
  excitation_dipole: DipolePayload | null;
  emission_dipole: DipolePayload | null;
  excitation_polarization_deg: number | null;
  emission_polarization_deg: number | null;
  visibility_exc: number | null;
  visibility_em: number | null;
  misalignment_deg: number | null;
  nonradiative_rate: number | null;
  quantum_efficiency: number | null;
  lineshape_ref: string | null;
  hr_ref: string | null;
}

export interface DefectDetail {
  id: string;
  charge: number;
  spin_multiplicity: string;
  ground_total_energy: number;
  host_group: string | null;
  elements: string[];
  transitions: TransitionPayload[];
  provenance: string;
  refractive_index: number;
}

export interface DefectSummary {
  id: string;
  charge: number;
  spin_multiplicity: string;
  host_group: string | null;
  elements: string[];
  n_transitions: number;
  zpls_ev: number[];
}

export interface SignaturePayload {
  zpl_ev?: number;
  zpl_tolerance_ev?: number;
  lifetime_min_s?: number;
  lifetime_max_s?: number;
  visibility_min?: number;
  misalignment_max_deg?: number;
  spin_multiplicity?: string;
  charge?: number;
  must_contain_elements?: string[];
  host_group?: string;
  limit?: number;
}

export interface MatchPayload {
  defect_id: string;
  transition_index: number;
  zpl_ev: number;
  zpl_nm: number;
  spin_channel: string;
  spin_multiplicity: string;
  charge: number;
  elements: string[];
  radiative_lifetime_s: number | "inf";
  quantum_efficiency: number | null;
  visibility_em: number | null;
  misalignment_deg: number | null;
  matched_criteria: string[];
  score: { criteria_satisfied: number; zpl_distance_ev: number };
}

export interface IdentifyResponse {
  matches: MatchPayload[];
  total: number;
}

export interface SpectrumResponse {
  defect_id: string;
  transition_index: number;
  zpl_ev: number;
  gamma_ev: number;
  energies_ev: number[];
  intensities: number[];
}

export interface HistogramResponse {
  property: string;
  bin_width: number;
  bin_edges: number[];
  counts: Record<string, number[]>;
  total: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, code, message);
}

export class DefectApi {
  constructor(readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; records: number; transitions: number }> {
    return this.getJson("/api/v1/health");
  }

  listDefects(params: { cursor?: string; limit?: number; element?: string } = {}): Promise<{
    items: DefectSummary[];
    next_cursor: string | null;
    total_defects: number;
  }> {
    const query = new URLSearchParams();
    if (params.cursor) query.set("cursor", params.cursor);
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    if (params.element) query.set("element", params.element);
    const suffix = query.toString() ? `?${query}` : "";
    return this.getJson(`/api/v1/defects${suffix}`);
  }

  getDefect(id: string): Promise<DefectDetail> {
    return this.getJson(`/api/v1/defects/${encodeURIComponent(id)}`);
  }

  async identify(signature: SignaturePayload): Promise<IdentifyResponse> {
    const response = await fetch(`${this.baseUrl}/api/v1/identify`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(signature),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as IdentifyResponse;
  }

  spectrum(id: string, transition: number, gammaEv: number): Promise<SpectrumResponse> {
    const query = new URLSearchParams({ gamma: String(gammaEv) });
    return this.getJson(
      `/api/v1/defects/${encodeURIComponent(id)}/transitions/${transition}/spectrum?${query}`,
    );
  }

  histogram(property: string, bin?: number): Promise<HistogramResponse> {
    const query = new URLSearchParams({ property });
    if (bin !== undefined) query.set("bin", String(bin));
    return this.getJson(`/api/v1/stats/histogram?${query}`);
  }

  structureUrl(id: string, format: "xyz" | "cif"): string {
    return `${this.baseUrl}/api/v1/defects/${encodeURIComponent(id)}/structure?format=${format}`;
  }

  spectrumCsvUrl(id: string, transition: number, gammaEv: number): string {
    return `${this.baseUrl}/api/v1/defects/${encodeURIComponent(id)}/transitions/${transition}/spectrum?format=csv&gamma=${gammaEv}`;
  }
}
