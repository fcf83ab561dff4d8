"""Band computation over the experiment CSV schema.

The input schema is the harness contract, nothing more:

    seed,t,estimator,diam_lower,diam_upper,lse_diam,wall_ms

Set-estimator rows (tags ``sme:*``) carry their diameter in ``diam_upper``;
the least-squares benchmark (tag ``lse``) carries it in ``lse_diam``. A band
is the per-time mean over seeds with a ±1 sample-std envelope. When a
summary CSV (schema ``estimator,t,mean,std,loglog_slope``) is supplied, the
recomputed band is cross-checked against it to 9 significant digits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

REQUIRED_COLUMNS = ("seed", "t", "estimator", "diam_lower", "diam_upper", "lse_diam", "wall_ms")


class SchemaError(ValueError):
    """Input CSV does not follow the expected schema."""


@dataclass
class Band:
    estimator: str
    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    slope: float | None = None  # annotation from the summary file, if given

    @property
    def lower_edge(self):
        return self.mean - self.std

    @property
    def upper_edge(self):
        return self.mean + self.std


def _value_column(estimator: str) -> str:
    return "lse_diam" if estimator == "lse" else "diam_upper"


def load_bands(csv_paths, series) -> list[Band]:
    """One band per requested estimator tag, aggregated across input files.

    Raises SchemaError when a column is missing or a requested tag has no
    rows anywhere.
    """
    if isinstance(csv_paths, str):
        csv_paths = [csv_paths]
    samples: dict[str, dict[int, list[float]]] = {tag: {} for tag in series}
    for path in csv_paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise SchemaError(f"{path}: missing columns {missing}")
            for row in reader:
                tag = row["estimator"]
                if tag not in samples:
                    continue
                raw = row[_value_column(tag)]
                if raw == "":
                    continue
                samples[tag].setdefault(int(row["t"]), []).append(float(raw))

    bands = []
    for tag in series:
        per_t = samples[tag]
        if not per_t:
            raise SchemaError(f"series tag {tag!r} not present in the input CSV(s)")
        ts = np.array(sorted(per_t), dtype=float)
        mean = np.array([np.mean(per_t[int(t)]) for t in ts])
        std = np.array(
            [np.std(per_t[int(t)], ddof=1) if len(per_t[int(t)]) > 1 else 0.0 for t in ts]
        )
        bands.append(Band(tag, ts, mean, std))
    return bands


def load_summary(path) -> dict:
    """Summary rows keyed by (estimator, t); values (mean, std, slope)."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = ("estimator", "t", "mean", "std")
        missing = [c for c in needed if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing summary columns {missing}")
        for row in reader:
            slope = row.get("loglog_slope", "")
            out[(row["estimator"], int(row["t"]))] = (
                float(row["mean"]),
                float(row["std"]),
                float(slope) if slope not in ("", None) else None,
            )
    return out


def _sig9(x: float) -> str:
    return f"{x:.9g}"


def crosscheck_bands(bands, summary) -> None:
    """Bands must reproduce the summary's mean/std to 9 significant digits.

    The summary file is the other implementation of the same statistic; a
    mismatch means one of the two pipelines drifted.
    """
    for band in bands:
        for i, t in enumerate(band.t):
            key = (band.estimator, int(t))
            if key not in summary:
                raise SchemaError(f"summary has no row for {key}")
            mean_ref, std_ref, slope = summary[key]
            if _sig9(band.mean[i]) != _sig9(mean_ref) or _sig9(band.std[i]) != _sig9(std_ref):
                raise SchemaError(
                    f"band for {key} disagrees with the summary: "
                    f"mean {_sig9(band.mean[i])} vs {_sig9(mean_ref)}, "
                    f"std {_sig9(band.std[i])} vs {_sig9(std_ref)}"
                )
            band.slope = slope
