"""HTTP facade over the query engine and bundle.

Read-only JSON API under /api/v1: defect listing and detail, on-the-fly PL
spectra, structure downloads, identification, and distribution histograms.
Responses are pure functions of (bundle, request).  The loaded bundle is an
immutable snapshot; POST /api/v1/reload builds a fresh index and swaps it
atomically, keeping the old snapshot serving if the reload fails (503).

The query contract is strict: unknown query parameters and unknown body
fields are rejected with a 400-class error envelope
``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel, ConfigDict

from . import lineshape as ls
from .bundle import Bundle, load_bundle
from .errors import (
    BundleError,
    InvalidCursorError,
    InvalidSignatureError,
    UnknownDefectError,
)
from .model import DefectRecord, TransitionRecord, with_rescaled_refractive_index
from .query import (
    DefectFilters,
    Index,
    Signature,
    build_index,
    get_defect,
    identify,
    list_defects,
)
from .stats import PROPERTIES, histogram, histogram_csv
from .structures import read_structure, render_structure

API_PREFIX = "/api/v1"


@dataclass(frozen=True)
class ApiConfig:
    bundle_path: str
    host: str = "127.0.0.1"
    port: int = 8533
    default_page_size: int = 50
    max_page_size: int = 500
    cors_origins: tuple[str, ...] = ()
    refractive_index_override: float | None = None
    static_dir: str | None = None

    def __post_init__(self):
        if not (0 < self.port < 65536):
            raise ValueError(f"invalid port {self.port}")
        if self.refractive_index_override is not None and self.refractive_index_override <= 0:
            raise ValueError("refractive index override must be positive")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


@dataclass
class SnapshotHolder:
    """Atomic holder for the (bundle, index) snapshot surviving reloads."""

    path: Path
    snapshot: Index = field(init=False)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.snapshot = build_index(load_bundle(self.path))

    def reload(self) -> Index:
        fresh = build_index(load_bundle(self.path))  # may raise; old snapshot stays
        with self._lock:
            self.snapshot = fresh
        return fresh


class SignatureBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    zpl_ev: float | None = None
    zpl_tolerance_ev: float = 0.4
    lifetime_min_s: float | None = None
    lifetime_max_s: float | None = None
    visibility_min: float | None = None
    misalignment_max_deg: float | None = None
    spin_multiplicity: str | None = None
    charge: int | None = None
    must_contain_elements: list[str] = []
    host_group: str | None = None
    limit: int | None = None

    def to_signature(self) -> Signature:
        return Signature(
            zpl_ev=self.zpl_ev,
            zpl_tolerance_ev=self.zpl_tolerance_ev,
            lifetime_min_s=self.lifetime_min_s,
            lifetime_max_s=self.lifetime_max_s,
            visibility_min=self.visibility_min,
            misalignment_max_deg=self.misalignment_max_deg,
            spin_multiplicity=self.spin_multiplicity,
            charge=self.charge,
            must_contain_elements=tuple(self.must_contain_elements),
            host_group=self.host_group,
        )


def _json_safe(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _maybe_rescale(t: TransitionRecord, bundle: Bundle, n_override: float | None) -> TransitionRecord:
    if n_override is None:
        return t
    return with_rescaled_refractive_index(t, bundle.refractive_index, n_override)


def _transition_payload(t: TransitionRecord, n: int) -> dict:
    payload = t.to_dict()
    payload["index"] = n
    return _json_safe(payload)


def _summary(record: DefectRecord) -> dict:
    return {
        "id": record.id,
        "charge": record.charge,
        "spin_multiplicity": record.spin_multiplicity,
        "host_group": record.host_group,
        "elements": sorted(record.contained_elements()),
        "n_transitions": len(record.transitions),
        "zpls_ev": [t.zpl for t in record.transitions],
    }


def _detail(record: DefectRecord, bundle: Bundle, n_override: float | None) -> dict:
    payload = _json_safe(record.to_dict())
    payload["transitions"] = [
        _transition_payload(_maybe_rescale(t, bundle, n_override), n)
        for n, t in enumerate(record.transitions)
    ]
    payload["elements"] = sorted(record.contained_elements())
    payload["refractive_index"] = n_override if n_override is not None else bundle.refractive_index
    return payload


def _strict_params(request: Request, allowed: set[str]) -> None:
    unknown = sorted(set(request.query_params) - allowed)
    if unknown:
        raise ApiError(400, "unknown_parameter", f"unknown query parameter(s): {', '.join(unknown)}")


def _float_param(request: Request, name: str, default=None, positive=False):
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ApiError(400, "invalid_parameter", f"{name} must be a number, got {raw!r}")
    if positive and value <= 0:
        raise ApiError(400, "invalid_parameter", f"{name} must be positive, got {value}")
    return value


def _int_param(request: Request, name: str, default=None):
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, "invalid_parameter", f"{name} must be an integer, got {raw!r}")


def create_app(config: ApiConfig) -> FastAPI:
    holder = SnapshotHolder(Path(config.bundle_path))
    app = FastAPI(title="hBN defect database", docs_url=None, redoc_url=None, openapi_url=None)

    if config.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_, exc: RequestValidationError):
        return _error_response(400, "invalid_request", str(exc.errors()[:3]))

    @app.exception_handler(UnknownDefectError)
    async def _unknown_defect(_, exc: UnknownDefectError):
        return _error_response(404, "unknown_defect", f"no defect with id {exc.args[0]!r}")

    @app.exception_handler(InvalidSignatureError)
    async def _bad_signature(_, exc: InvalidSignatureError):
        return _error_response(400, "invalid_signature", str(exc))

    @app.exception_handler(InvalidCursorError)
    async def _bad_cursor(_, exc: InvalidCursorError):
        return _error_response(400, "invalid_cursor", str(exc))

    @app.get(f"{API_PREFIX}/health")
    def health(request: Request):
        _strict_params(request, set())
        index = holder.snapshot
        return {
            "status": "ok",
            "records": index.n_defects,
            "transitions": index.n_transitions,
            "bundle_version": index.bundle.manifest.get("version"),
        }

    @app.get(f"{API_PREFIX}/defects")
    def defects(request: Request):
        _strict_params(request, {"cursor", "limit", "spin", "charge", "group", "element"})
        index = holder.snapshot
        limit = _int_param(request, "limit", config.default_page_size)
        if not (1 <= limit <= config.max_page_size):
            raise ApiError(400, "invalid_parameter", f"limit must be in [1, {config.max_page_size}]")
        filters = DefectFilters(
            spin_multiplicity=request.query_params.get("spin"),
            charge=_int_param(request, "charge"),
            host_group=request.query_params.get("group"),
            element=request.query_params.get("element"),
        )
        if filters.spin_multiplicity is not None and filters.spin_multiplicity not in (
            "singlet", "doublet", "triplet",
        ):
            raise ApiError(400, "invalid_parameter", f"unknown spin {filters.spin_multiplicity!r}")
        page, next_cursor = list_defects(index, request.query_params.get("cursor"), limit, filters)
        return {
            "items": [_summary(r) for r in page],
            "next_cursor": next_cursor,
            "total_defects": index.n_defects,
        }

    @app.get(f"{API_PREFIX}/defects/{{defect_id}}")
    def defect_detail(defect_id: str, request: Request):
        _strict_params(request, {"refractive_index"})
        index = holder.snapshot
        n_override = _float_param(request, "refractive_index", config.refractive_index_override, positive=True)
        record = get_defect(index, defect_id)
        return _detail(record, index.bundle, n_override)

    @app.get(f"{API_PREFIX}/defects/{{defect_id}}/transitions/{{n}}/spectrum")
    def spectrum(defect_id: str, n: int, request: Request):
        _strict_params(request, {"gamma", "emin", "emax", "points", "format"})
        index = holder.snapshot
        record = get_defect(index, defect_id)
        if not (0 <= n < len(record.transitions)):
            raise ApiError(404, "unknown_transition", f"{defect_id} has no transition {n}")
        t = record.transitions[n]
        if t.hr_ref is None:
            raise ApiError(404, "spectrum_unavailable", f"{defect_id} transition {n} has no phonon data")
        gamma = _float_param(request, "gamma", ls.DEFAULT_GAMMA_EV)
        if gamma is None or gamma <= 0:
            raise ApiError(400, "invalid_parameter", f"gamma must be positive, got {gamma}")
        emin = _float_param(request, "emin", max(0.05, t.zpl - 0.8))
        emax = _float_param(request, "emax", t.zpl + 0.2)
        points = _int_param(request, "points", 1201)
        if not (2 <= points <= 20001):
            raise ApiError(400, "invalid_parameter", "points must be in [2, 20001]")
        try:
            grid = ls.SpectralGrid(emin, emax, points)
            hr = ls.read_hr_csv(index.bundle.resolve(t.hr_ref))
            result = ls.pl_spectrum(hr, t.zpl, gamma, grid)
        except ValueError as exc:
            raise ApiError(400, "invalid_parameter", str(exc))
        if request.query_params.get("format", "json") == "csv":
            lines = ["energy_eV,intensity"]
            lines.extend(
                f"{float(e)!r},{float(i)!r}" for e, i in zip(result.energies, result.intensities)
            )
            return PlainTextResponse("\n".join(lines) + "\n", media_type="text/csv")
        return {
            "defect_id": defect_id,
            "transition_index": n,
            "zpl_ev": t.zpl,
            "gamma_ev": gamma,
            "energies_ev": result.energies.tolist(),
            "intensities": result.intensities.tolist(),
        }

    @app.get(f"{API_PREFIX}/defects/{{defect_id}}/structure")
    def structure(defect_id: str, request: Request):
        _strict_params(request, {"format"})
        index = holder.snapshot
        record = get_defect(index, defect_id)
        fmt = request.query_params.get("format", "xyz")
        if fmt not in ("xyz", "cif"):
            raise ApiError(400, "invalid_parameter", f"format must be xyz or cif, got {fmt!r}")
        if record.structure_ref is None:
            raise ApiError(404, "structure_unavailable", f"{defect_id} has no structure file")
        path = index.bundle.resolve(record.structure_ref)
        if not path.is_file():
            raise ApiError(404, "structure_unavailable", f"structure file missing for {defect_id}")
        if path.suffix == f".{fmt}":
            body = path.read_bytes()  # byte-stable passthrough
        else:
            body = render_structure(read_structure(path), fmt)
        return Response(
            content=body,
            media_type="chemical/x-cif" if fmt == "cif" else "chemical/x-xyz",
            headers={"Content-Disposition": f'attachment; filename="{defect_id}.{fmt}"'},
        )

    @app.post(f"{API_PREFIX}/identify")
    def identify_endpoint(body: SignatureBody):
        index = holder.snapshot
        if body.limit is not None and body.limit < 1:
            raise ApiError(400, "invalid_parameter", "limit must be >= 1")
        matches = identify(index, body.to_signature())
        total = len(matches)
        if body.limit is not None:
            matches = matches[: body.limit]
        items = []
        for m in matches:
            record = index.bundle.get(m.defect_id)
            t = record.transitions[m.transition_index]
            items.append(_json_safe({
                "defect_id": m.defect_id,
                "transition_index": m.transition_index,
                "zpl_ev": t.zpl,
                "zpl_nm": t.zpl_nm,
                "spin_channel": t.spin_channel,
                "spin_multiplicity": record.spin_multiplicity,
                "charge": record.charge,
                "elements": sorted(record.contained_elements()),
                "radiative_lifetime_s": t.radiative_lifetime,
                "quantum_efficiency": t.quantum_efficiency,
                "visibility_em": t.visibility_em,
                "misalignment_deg": t.misalignment_deg,
                "matched_criteria": list(m.matched_criteria),
                "score": {
                    "criteria_satisfied": m.criteria_satisfied,
                    "zpl_distance_ev": m.zpl_distance_ev,
                },
            }))
        return {"matches": items, "total": total}

    @app.get(f"{API_PREFIX}/stats/histogram")
    def stats_histogram(request: Request):
        _strict_params(request, {"property", "bin", "format"})
        index = holder.snapshot
        prop = request.query_params.get("property")
        if prop not in PROPERTIES:
            raise ApiError(400, "invalid_parameter", f"property must be one of {PROPERTIES}")
        bin_width = _float_param(request, "bin", None, positive=True)
        report = histogram(index.bundle, prop, bin_width)
        if request.query_params.get("format", "json") == "csv":
            return PlainTextResponse(histogram_csv(report), media_type="text/csv")
        return report.to_dict()

    @app.post(f"{API_PREFIX}/reload")
    def reload(request: Request):
        _strict_params(request, set())
        try:
            fresh = holder.reload()
        except (BundleError, OSError) as exc:
            return _error_response(503, "reload_failed", f"bundle reload failed, old snapshot kept: {exc}")
        return {"status": "reloaded", "records": fresh.n_defects}

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="webapp")

    app.state.holder = holder
    return app


def serve(config: ApiConfig) -> None:
    """Run the service under uvicorn (blocking); SIGHUP triggers a bundle
    reload just like POST /api/v1/reload."""
    import signal
    import uvicorn

    app = create_app(config)

    def _reload_on_hup(signum, frame):
        try:
            app.state.holder.reload()
        except (BundleError, OSError):
            pass  # reload failed; the old snapshot keeps serving

    try:
        signal.signal(signal.SIGHUP, _reload_on_hup)
    except (AttributeError, ValueError):
        pass  # platform without SIGHUP or non-main thread
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
