"""In-memory index and the defect identification procedure.

An observed :class:`Signature` is matched with AND semantics: a transition
qualifies only if it satisfies every present criterion, mirroring the
experimental workflow of narrowing candidates one observation at a time.
Matches are ranked by proximity of the ZPL to the observed value (the
primary observable), then by lifetime distance to the requested interval
midpoint on a log scale, then by id and transition index so the order is a
deterministic total order.

The ZPL tolerance defaults to 0.4 eV, wide enough to absorb functional
accuracy and residual strain shifts between simulation and experiment.
"""

from __future__ import annotations

import base64
import bisect
import math
from dataclasses import dataclass

from .bundle import Bundle
from .errors import InvalidCursorError, InvalidSignatureError, UnknownDefectError
from .model import DefectRecord, HOST_GROUPS, SPIN_MULTIPLICITIES, TransitionRecord

DEFAULT_ZPL_TOLERANCE_EV = 0.4

CRITERIA = (
    "zpl",
    "lifetime",
    "visibility",
    "misalignment",
    "spin_multiplicity",
    "charge",
    "elements",
    "host_group",
)


@dataclass(frozen=True)
class Signature:
    """Experimentally observed properties used as an identification query.

    Any subset of criteria may be present, but at least one is required.
    The visibility criterion applies to the emission dipole (the quantity
    polarization-resolved PL measures).
    """

    zpl_ev: float | None = None
    zpl_tolerance_ev: float = DEFAULT_ZPL_TOLERANCE_EV
    lifetime_min_s: float | None = None
    lifetime_max_s: float | None = None
    visibility_min: float | None = None
    misalignment_max_deg: float | None = None
    spin_multiplicity: str | None = None
    charge: int | None = None
    must_contain_elements: tuple[str, ...] = ()
    host_group: str | None = None

    def criteria(self) -> tuple[str, ...]:
        present = []
        if self.zpl_ev is not None:
            present.append("zpl")
        if self.lifetime_min_s is not None or self.lifetime_max_s is not None:
            present.append("lifetime")
        if self.visibility_min is not None:
            present.append("visibility")
        if self.misalignment_max_deg is not None:
            present.append("misalignment")
        if self.spin_multiplicity is not None:
            present.append("spin_multiplicity")
        if self.charge is not None:
            present.append("charge")
        if self.must_contain_elements:
            present.append("elements")
        if self.host_group is not None:
            present.append("host_group")
        return tuple(present)

    def validate(self) -> None:
        if not self.criteria():
            raise InvalidSignatureError("signature must carry at least one criterion")
        if self.zpl_ev is not None:
            if self.zpl_tolerance_ev <= 0:
                raise InvalidSignatureError(f"ZPL tolerance must be positive, got {self.zpl_tolerance_ev}")
            if self.zpl_ev <= 0:
                raise InvalidSignatureError(f"observed ZPL must be positive, got {self.zpl_ev}")
        for name, value in (("lifetime_min_s", self.lifetime_min_s), ("lifetime_max_s", self.lifetime_max_s)):
            if value is not None and value <= 0:
                raise InvalidSignatureError(f"{name} must be positive, got {value}")
        if (
            self.lifetime_min_s is not None
            and self.lifetime_max_s is not None
            and self.lifetime_min_s > self.lifetime_max_s
        ):
            raise InvalidSignatureError("lifetime_min_s exceeds lifetime_max_s")
        if self.visibility_min is not None and not (0.0 <= self.visibility_min <= 1.0):
            raise InvalidSignatureError(f"visibility_min must be in [0, 1], got {self.visibility_min}")
        if self.misalignment_max_deg is not None and not (0.0 <= self.misalignment_max_deg <= 30.0):
            raise InvalidSignatureError(
                f"misalignment_max_deg must be in [0, 30], got {self.misalignment_max_deg}"
            )
        if self.spin_multiplicity is not None and self.spin_multiplicity not in SPIN_MULTIPLICITIES:
            raise InvalidSignatureError(f"unknown spin multiplicity {self.spin_multiplicity!r}")
        if self.charge is not None and self.charge not in (-1, 0, 1):
            raise InvalidSignatureError(f"charge must be -1, 0 or +1, got {self.charge}")
        if self.host_group is not None and self.host_group not in HOST_GROUPS:
            raise InvalidSignatureError(f"unknown host group {self.host_group!r}")


@dataclass(frozen=True)
class Match:
    defect_id: str
    transition_index: int
    matched_criteria: tuple[str, ...]
    criteria_satisfied: int
    zpl_distance_ev: float

    def sort_key(self, lifetime_distance: float):
        return (self.zpl_distance_ev, lifetime_distance, self.defect_id, self.transition_index)


class Index:
    """Immutable query index over a bundle.

    Transitions are kept in a ZPL-sorted array for window queries; defects
    are sorted by id for stable pagination.  Safe for any number of
    concurrent readers; a reload builds a fresh index and swaps it in.
    """

    def __init__(self, bundle: Bundle):
        self._bundle = bundle
        self.defects: tuple[DefectRecord, ...] = bundle.records  # sorted by id
        entries = []
        for record in self.defects:
            for n, t in enumerate(record.transitions):
                entries.append((t.zpl, record, n, t))
        entries.sort(key=lambda e: (e[0], e[1].id, e[2]))
        self._zpls = [e[0] for e in entries]
        self._entries = entries
        self._element_map: dict[str, set[str]] = {}
        for record in self.defects:
            for el in record.contained_elements():
                self._element_map.setdefault(el, set()).add(record.id)

    @property
    def bundle(self) -> Bundle:
        return self._bundle

    @property
    def n_defects(self) -> int:
        return len(self.defects)

    @property
    def n_transitions(self) -> int:
        return len(self._entries)

    def defects_with_element(self, element: str) -> frozenset[str]:
        return frozenset(self._element_map.get(element, ()))

    def window(self, lo: float, hi: float):
        """Transitions with zpl in [lo, hi], by binary search."""
        start = bisect.bisect_left(self._zpls, lo)
        stop = bisect.bisect_right(self._zpls, hi)
        return self._entries[start:stop]

    def all_transitions(self):
        return self._entries


def build_index(bundle: Bundle) -> Index:
    return Index(bundle)


def _lifetime_log_distance(sig: Signature, lifetime: float) -> float:
    if sig.lifetime_min_s is None or sig.lifetime_max_s is None:
        return 0.0
    if lifetime <= 0 or math.isinf(lifetime):
        return math.inf
    mid = 0.5 * (math.log10(sig.lifetime_min_s) + math.log10(sig.lifetime_max_s))
    return abs(math.log10(lifetime) - mid)


def _transition_matches(sig: Signature, record: DefectRecord, t: TransitionRecord):
    matched = []
    if sig.zpl_ev is not None:
        if abs(t.zpl - sig.zpl_ev) > sig.zpl_tolerance_ev:
            return None
        matched.append("zpl")
    if sig.lifetime_min_s is not None or sig.lifetime_max_s is not None:
        lt = t.radiative_lifetime
        if not math.isfinite(lt):
            return None
        if sig.lifetime_min_s is not None and lt < sig.lifetime_min_s:
            return None
        if sig.lifetime_max_s is not None and lt > sig.lifetime_max_s:
            return None
        matched.append("lifetime")
    if sig.visibility_min is not None:
        if t.visibility_em is None or t.visibility_em < sig.visibility_min:
            return None
        matched.append("visibility")
    if sig.misalignment_max_deg is not None:
        if t.misalignment_deg is None or t.misalignment_deg > sig.misalignment_max_deg:
            return None
        matched.append("misalignment")
    if sig.spin_multiplicity is not None:
        if record.spin_multiplicity != sig.spin_multiplicity:
            return None
        matched.append("spin_multiplicity")
    if sig.charge is not None:
        if record.charge != sig.charge:
            return None
        matched.append("charge")
    if sig.must_contain_elements:
        if not set(sig.must_contain_elements) <= record.contained_elements():
            return None
        matched.append("elements")
    if sig.host_group is not None:
        if record.host_group != sig.host_group:
            return None
        matched.append("host_group")
    return tuple(matched)


def identify(index: Index, signature: Signature) -> list[Match]:
    """Ranked matches for an observed signature (AND over all criteria)."""
    signature.validate()
    if signature.zpl_ev is not None:
        # prefilter window widened by one ulp; the exact |zpl - v| <= tol
        # check below decides membership
        lo = signature.zpl_ev - signature.zpl_tolerance_ev
        hi = signature.zpl_ev + signature.zpl_tolerance_ev
        candidates = index.window(math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf))
    else:
        candidates = index.all_transitions()

    scored = []
    for zpl, record, n, t in candidates:
        matched = _transition_matches(signature, record, t)
        if matched is None:
            continue
        match = Match(
            defect_id=record.id,
            transition_index=n,
            matched_criteria=matched,
            criteria_satisfied=len(matched),
            zpl_distance_ev=abs(zpl - signature.zpl_ev) if signature.zpl_ev is not None else 0.0,
        )
        scored.append((match.sort_key(_lifetime_log_distance(signature, t.radiative_lifetime)), match))
    scored.sort(key=lambda pair: pair[0])
    return [m for _, m in scored]


def get_defect(index: Index, defect_id: str) -> DefectRecord:
    record = index.bundle.get(defect_id)
    if record is None:
        raise UnknownDefectError(defect_id)
    return record


def encode_cursor(last_id: str) -> str:
    return base64.urlsafe_b64encode(f"v1:{last_id}".encode()).decode()


def decode_cursor(cursor: str) -> str:
    try:
        raw = base64.urlsafe_b64decode(cursor.encode()).decode()
    except Exception as exc:
        raise InvalidCursorError(f"undecodable cursor {cursor!r}") from exc
    if not raw.startswith("v1:"):
        raise InvalidCursorError(f"unsupported cursor {cursor!r}")
    return raw[3:]


@dataclass(frozen=True)
class DefectFilters:
    spin_multiplicity: str | None = None
    charge: int | None = None
    host_group: str | None = None
    element: str | None = None

    def accepts(self, record: DefectRecord) -> bool:
        if self.spin_multiplicity is not None and record.spin_multiplicity != self.spin_multiplicity:
            return False
        if self.charge is not None and record.charge != self.charge:
            return False
        if self.host_group is not None and record.host_group != self.host_group:
            return False
        if self.element is not None and self.element not in record.contained_elements():
            return False
        return True


def list_defects(
    index: Index,
    cursor: str | None = None,
    limit: int = 50,
    filters: DefectFilters | None = None,
):
    """Stable id-ordered page of defects; returns (records, next_cursor)."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    filters = filters or DefectFilters()
    after = decode_cursor(cursor) if cursor else None
    page: list[DefectRecord] = []
    next_cursor = None
    for record in index.defects:
        if after is not None and record.id <= after:
            continue
        if not filters.accepts(record):
            continue
        if len(page) == limit:
            next_cursor = encode_cursor(page[-1].id)
            break
        page.append(record)
    return page, next_cursor
