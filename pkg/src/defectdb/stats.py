"""Distribution reports over a bundle: histograms by periodic-table group.

Supported properties: ``zpl`` (eV, linear bins), ``lifetime`` (binned on a
log10 scale in seconds, since the population spans microseconds to
nanoseconds), and ``misalignment`` (degrees).  Counts are kept per host
group III-VI plus "none" for undoped defects, and always conserve the
number of transitions carrying the property.

The report path emits a delimited CSV plus a rendered matplotlib figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .bundle import Bundle

PROPERTIES = ("zpl", "lifetime", "misalignment")
DEFAULT_BIN_WIDTHS = {"zpl": 0.25, "lifetime": 0.5, "misalignment": 5.0}
AXIS_LABELS = {
    "zpl": "ZPL (eV)",
    "lifetime": "log10(radiative lifetime / s)",
    "misalignment": "polarization misalignment (deg)",
}
GROUP_ORDER = ("III", "IV", "V", "VI", "none")


@dataclass(frozen=True)
class HistogramReport:
    property_name: str
    bin_width: float
    bin_edges: tuple[float, ...]            # len = bins + 1
    counts: dict[str, tuple[int, ...]]      # group -> per-bin counts
    total: int

    @property
    def n_bins(self) -> int:
        return max(0, len(self.bin_edges) - 1)

    def to_dict(self) -> dict:
        return {
            "property": self.property_name,
            "bin_width": self.bin_width,
            "bin_edges": list(self.bin_edges),
            "counts": {g: list(c) for g, c in self.counts.items()},
            "total": self.total,
        }


def _values(bundle: Bundle, property_name: str):
    """(group, value) pairs for every transition carrying the property."""
    for record in bundle.records:
        group = record.host_group or "none"
        for t in record.transitions:
            if property_name == "zpl":
                yield group, t.zpl
            elif property_name == "lifetime":
                if math.isfinite(t.radiative_lifetime) and t.radiative_lifetime > 0:
                    yield group, math.log10(t.radiative_lifetime)
            elif property_name == "misalignment":
                if t.misalignment_deg is not None:
                    yield group, t.misalignment_deg


def histogram(bundle: Bundle, property_name: str, bin_width: float | None = None) -> HistogramReport:
    if property_name not in PROPERTIES:
        raise ValueError(f"unknown property {property_name!r}; supported: {PROPERTIES}")
    width = bin_width if bin_width is not None else DEFAULT_BIN_WIDTHS[property_name]
    if width <= 0:
        raise ValueError(f"bin width must be positive, got {width}")

    pairs = list(_values(bundle, property_name))
    if not pairs:
        return HistogramReport(property_name, width, (), {}, 0)

    values = [v for _, v in pairs]
    first = math.floor(min(values) / width)
    last = math.floor(max(values) / width)
    n_bins = last - first + 1
    edges = tuple((first + i) * width for i in range(n_bins + 1))

    counts = {g: [0] * n_bins for g in sorted({g for g, _ in pairs})}
    for group, value in pairs:
        idx = min(int(math.floor(value / width)) - first, n_bins - 1)
        counts[group][idx] += 1
    return HistogramReport(
        property_name=property_name,
        bin_width=width,
        bin_edges=edges,
        counts={g: tuple(c) for g, c in counts.items()},
        total=len(pairs),
    )


def histogram_csv(report: HistogramReport) -> str:
    lines = ["property,bin_lo,bin_hi,group,count"]
    for i in range(report.n_bins):
        lo, hi = report.bin_edges[i], report.bin_edges[i + 1]
        for group in sorted(report.counts):
            lines.append(f"{report.property_name},{lo!r},{hi!r},{group},{report.counts[group][i]}")
    return "\n".join(lines) + "\n"


def write_histogram_csv(report: HistogramReport, path) -> None:
    Path(path).write_text(histogram_csv(report))


def render_histogram_figure(report: HistogramReport, path) -> None:
    """Stacked per-group histogram rendered to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if report.n_bins:
        centers = [0.5 * (report.bin_edges[i] + report.bin_edges[i + 1]) for i in range(report.n_bins)]
        bottom = [0] * report.n_bins
        groups = [g for g in GROUP_ORDER if g in report.counts]
        for group in groups:
            heights = report.counts[group]
            ax.bar(centers, heights, width=report.bin_width * 0.92, bottom=bottom,
                   label=f"group {group}" if group != "none" else "no dopant")
            bottom = [b + h for b, h in zip(bottom, heights)]
        ax.legend(frameon=False)
    ax.set_xlabel(AXIS_LABELS[report.property_name])
    ax.set_ylabel("transitions")
    ax.set_title(f"{report.property_name} distribution ({report.total} transitions)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
