"""Curve CSV interchange format.

One curve per file: a single comment header carrying kind, fixed biases, and
the y unit, followed by bare ``x,y`` rows with at least 9 significant digits.
The same format is shared by every command that reads or writes curves.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .device import CURVE_UNITS, VDS_HIGH, VDS_LOW, Curve, CurveKind, CurveSet
from .errors import DataError

_HEADER_RE = re.compile(
    r"^#\s*kind=(?P<kind>\w+),\s*vds=(?P<vds>[^,]+),\s*vgs=(?P<vgs>[^,]+),\s*unit=(?P<unit>\w+)\s*$"
)

#: Kinds that may appear in interchange files.
WRITABLE_KINDS = (CurveKind.IDS_VGS, CurveKind.CGG_VGS, CurveKind.IDS_VDS, CurveKind.GM_VGS)


def _fmt(v: float) -> str:
    return "%.17g" % v


def _bias_str(v: float | None) -> str:
    return "na" if v is None else _fmt(v)


def write_curve_csv(curve: Curve, path):
    if curve.kind not in WRITABLE_KINDS:
        raise DataError(f"curve kind {curve.kind.value} has no CSV representation")
    lines = [
        f"# kind={curve.kind.value}, vds={_bias_str(curve.vds)}, "
        f"vgs={_bias_str(curve.vgs)}, unit={CURVE_UNITS[curve.kind]}"
    ]
    for x, y in zip(curve.x, curve.y):
        lines.append(f"{_fmt(x)},{_fmt(y)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path) -> Curve:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise DataError(f"{path}: bad header line {lines[0]!r}")
    try:
        kind = CurveKind(m.group("kind"))
    except ValueError as exc:
        raise DataError(f"{path}: unknown curve kind {m.group('kind')!r}") from exc
    if kind not in WRITABLE_KINDS:
        raise DataError(f"{path}: kind {kind.value} not allowed in CSV files")
    if m.group("unit") != CURVE_UNITS[kind]:
        raise DataError(
            f"{path}: unit {m.group('unit')!r} inconsistent with kind {kind.value} "
            f"(expected {CURVE_UNITS[kind]!r})"
        )

    def bias(text, field):
        if text == "na":
            return None
        try:
            return float(text)
        except ValueError as exc:
            raise DataError(f"{path}: bad {field} value {text!r}") from exc

    vds = bias(m.group("vds"), "vds")
    vgs = bias(m.group("vgs"), "vgs")
    xs, ys = [], []
    for ln_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"{path}:{ln_no}: expected 'x,y', got {line!r}")
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
        except ValueError as exc:
            raise DataError(f"{path}:{ln_no}: {exc}") from exc
    if len(xs) < 2:
        raise DataError(f"{path}: need at least 2 data rows")
    try:
        return Curve(kind, np.array(xs), np.array(ys), vds=vds, vgs=vgs)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


#: Stable file names used when a curve set is written as a directory.
CURVESET_FILES = {
    "ids_low": "ids_vgs_low.csv",
    "ids_high": "ids_vgs_high.csv",
    "cgg_low": "cgg_vgs.csv",
}


def write_curveset_dir(cs: CurveSet, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_curve_csv(cs.ids_low, directory / CURVESET_FILES["ids_low"])
    write_curve_csv(cs.ids_high, directory / CURVESET_FILES["ids_high"])
    write_curve_csv(cs.cgg_low, directory / CURVESET_FILES["cgg_low"])


def read_curveset_dir(directory) -> CurveSet:
    """Assemble a CurveSet from every curve CSV in a directory, classified by
    header metadata (file names are irrelevant)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"{directory}: not a directory")
    ids_low = ids_high = cgg_low = None
    for path in sorted(directory.glob("*.csv")):
        curve = read_curve_csv(path)
        if curve.kind == CurveKind.IDS_VGS and curve.vds is not None:
            if abs(curve.vds - VDS_LOW) < 1e-9:
                ids_low = curve
            elif abs(curve.vds - VDS_HIGH) < 1e-9:
                ids_high = curve
        elif curve.kind == CurveKind.CGG_VGS:
            cgg_low = curve
    missing = [name for name, c in
               [("Ids-Vgs at Vds=0.05", ids_low), ("Ids-Vgs at Vds=0.7", ids_high),
                ("Cgg-Vgs", cgg_low)] if c is None]
    if missing:
        raise DataError(f"{directory}: missing curves: {', '.join(missing)}")
    return CurveSet(ids_low=ids_low, ids_high=ids_high, cgg_low=cgg_low)


def write_overlay_csv(target: Curve, extracted: Curve, path):
    """Two-curve overlay for plotting: x,target,extracted rows."""
    if target.x.shape != extracted.x.shape or np.any(target.x != extracted.x):
        raise DataError("overlay curves must share a grid")
    unit = CURVE_UNITS[target.kind]
    lines = [
        f"# kind={target.kind.value}, vds={_bias_str(target.vds)}, "
        f"vgs={_bias_str(target.vgs)}, unit={unit}, columns=x,target,extracted"
    ]
    for x, t, e in zip(target.x, target.y, extracted.y):
        lines.append(f"{_fmt(x)},{_fmt(t)},{_fmt(e)}")
    Path(path).write_text("\n".join(lines) + "\n")
