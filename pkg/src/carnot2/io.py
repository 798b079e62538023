"""File formats: curves, boundary data, structures, approximations, reports.

Everything is JSON with a ``format`` tag.  Floats go through Python's
shortest round-trip representation, so writing and re-reading reproduces
every coordinate bit for bit, and identical inputs serialize to byte
identical files.  Non-finite report numbers are flagged as strings
("nan", "inf", "-inf") since JSON has no encoding for them.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Any

import numpy as np

from . import __version__
from .curves import HorizontalCurve, PlanarCurve, SampledCurve
from .group import FreeGroupPoint, GeneralGroupPoint, Step2Structure, vertical_dim
from .homomorphism import GeneralHorizontalCurve, TargetSampledCurve
from .lusin import ApproximationReport, CurveFragment, SampledFragment, StitchedCurve
from .segments import segment_from_dict

__all__ = [
    "SchemaError",
    "load_file",
    "dump_file",
    "curve_to_dict",
    "samples_to_dict",
    "stitched_to_dict",
    "structure_to_dict",
    "structure_from_dict",
    "report_to_dict",
    "boundary_from_dict",
    "object_from_dict",
    "write_csv",
]


class SchemaError(ValueError):
    """A file does not match the expected schema."""


def _num(x: float) -> Any:
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _vec(a) -> list:
    return [float(v) for v in np.asarray(a, float)]


def dump_file(path: str, data: dict):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, allow_nan=False)
        fh.write("\n")


def load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or "format" not in data:
        raise SchemaError(f"{path}: missing 'format' tag")
    return data


# ---------------------------------------------------------------------------
# structures
# ---------------------------------------------------------------------------


def structure_to_dict(st: Step2Structure) -> dict:
    entries = []
    for k in range(st.m):
        for i in range(st.r):
            for j in range(i):
                val = st.bracket[k, i, j]
                if val != 0.0:
                    entries.append([i + 1, j + 1, k + 1, float(val)])
    return {"format": "structure/1", "r": st.r, "m": st.m, "brackets": entries}


def structure_from_dict(data: dict) -> Step2Structure:
    try:
        r = int(data["r"])
        m = int(data["m"])
        entries = data["brackets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad structure record: {exc}") from exc
    try:
        return Step2Structure.from_brackets(r, m, entries)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


def curve_to_dict(curve: HorizontalCurve | GeneralHorizontalCurve) -> dict:
    out: dict = {"format": "curve/1", "kind": "segments"}
    if isinstance(curve, GeneralHorizontalCurve):
        out["structure"] = structure_to_dict(curve.structure)
        out["r"] = curve.structure.r
        out["start"] = {"x": _vec(curve.start.a), "y": _vec(curve.start.b)}
    else:
        out["r"] = curve.r
        out["start"] = {"x": _vec(curve.start.x), "y": _vec(curve.start.y)}
    out["t0"] = float(curve.base.t0)
    out["segments"] = [seg.to_dict() for seg in curve.base.segments]
    out["vertical_knots"] = [_vec(row) for row in curve.vertical_knots]
    return out


def samples_to_dict(s: SampledCurve | TargetSampledCurve) -> dict:
    out: dict = {"format": "curve/1", "kind": "samples"}
    if isinstance(s, TargetSampledCurve):
        out["structure"] = structure_to_dict(s.structure)
        out["r"] = s.structure.r
        xs, ys, dxs, dys = s.a, s.b, s.da, s.db
    else:
        out["r"] = s.r
        xs, ys, dxs, dys = s.xs, s.ys, s.dxs, s.dys
    records = []
    for k, t in enumerate(s.times):
        rec: dict = {"t": float(t), "x": _vec(xs[k]), "y": _vec(ys[k])}
        if dxs is not None:
            rec["v"] = _vec(dxs[k])
        if dys is not None:
            rec["vy"] = _vec(dys[k])
        records.append(rec)
    out["samples"] = records
    return out


def _samples_from_dict(data: dict):
    records = data.get("samples")
    if not isinstance(records, list) or not records:
        raise SchemaError("samples curve needs a nonempty 'samples' list")
    r = int(data.get("r", 0))
    if r < 2:
        raise SchemaError("samples curve needs integer r >= 2")
    structure = None
    if "structure" in data:
        structure = structure_from_dict(data["structure"])
        if structure.r != r:
            raise SchemaError("structure rank does not match curve r")
    m = structure.m if structure is not None else vertical_dim(r)
    times, xs, ys, vs, vys = [], [], [], [], []
    has_y = "y" in records[0]
    has_v = "v" in records[0]
    has_vy = "vy" in records[0]
    for rec in records:
        try:
            times.append(float(rec["t"]))
            x = rec["x"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad sample record: {exc}") from exc
        if len(x) != r:
            raise SchemaError(f"sample x has length {len(x)}, expected {r}")
        xs.append(x)
        if has_y:
            y = rec.get("y")
            if y is None or len(y) != m:
                raise SchemaError(f"sample y must have length {m}")
            ys.append(y)
        elif "y" in rec:
            raise SchemaError("samples must all or none carry 'y'")
        if has_v:
            v = rec.get("v")
            if v is None or len(v) != r:
                raise SchemaError(f"sample v must have length {r}")
            vs.append(v)
        if has_vy:
            vy = rec.get("vy")
            if vy is None or len(vy) != m:
                raise SchemaError(f"sample vy must have length {m}")
            vys.append(vy)
    times = np.array(times)
    if np.any(np.diff(times) <= 0.0):
        raise SchemaError("sample times must be strictly increasing")
    xs = np.array(xs, float)
    ys = np.array(ys, float) if has_y else np.zeros((len(times), 0))
    if not has_y:
        ys = None
    dxs = np.array(vs, float) if has_v else None
    dys = np.array(vys, float) if has_vy else None
    return structure, times, xs, ys, dxs, dys


def sampled_curve_from_dict(data: dict):
    """SampledCurve or TargetSampledCurve from a samples record; vertical
    coordinates must be present (use the lift command to complete planar
    data)."""
    structure, times, xs, ys, dxs, dys = _samples_from_dict(data)
    if ys is None:
        raise SchemaError(
            "samples carry no vertical coordinates; lift the planar data first"
        )
    try:
        if structure is not None:
            return TargetSampledCurve(structure, times, xs, ys, dxs, dys)
        return SampledCurve(times, xs, ys, dxs, dys)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def planar_samples_from_dict(data: dict) -> tuple[np.ndarray, np.ndarray]:
    """(times, points) of the planar part of a samples record."""
    _, times, xs, _, _, _ = _samples_from_dict(data)
    return times, xs


def _segments_curve_from_dict(data: dict):
    try:
        t0 = float(data.get("t0", 0.0))
        seg_records = data["segments"]
        start = data["start"]
        knots = np.array(data["vertical_knots"], float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad segments curve: {exc}") from exc
    try:
        segments = tuple(segment_from_dict(rec) for rec in seg_records)
        base = PlanarCurve(segments, t0)
        if "structure" in data:
            structure = structure_from_dict(data["structure"])
            point = GeneralGroupPoint(
                structure, np.array(start["x"], float), np.array(start["y"], float)
            )
            return GeneralHorizontalCurve(structure, base, point, knots)
        point = FreeGroupPoint(np.array(start["x"], float), np.array(start["y"], float))
        return HorizontalCurve(base, point, knots)
    except (ValueError, KeyError) as exc:
        raise SchemaError(str(exc)) from exc


def stitched_to_dict(gamma: StitchedCurve) -> dict:
    pieces = []
    for piece in gamma.pieces:
        if isinstance(piece, SampledFragment):
            records = []
            for k, t in enumerate(piece.times):
                records.append(
                    {
                        "t": float(t),
                        "x": _vec(piece.xs[k]),
                        "y": _vec(piece.ys[k]),
                        "v": _vec(piece.dxs[k]),
                        "vy": _vec(piece.dys[k]),
                    }
                )
            pieces.append({"kind": "samples", "samples": records})
        else:
            inner = curve_to_dict(piece.curve)
            inner.pop("format")
            inner.pop("kind")
            pieces.append({"kind": "curve", **inner})
    r = None
    for piece in gamma.pieces:
        if isinstance(piece, SampledFragment):
            r = piece.xs.shape[1]
            break
        r = piece.curve.r
        break
    return {"format": "approximation/1", "r": r, "pieces": pieces}


def stitched_from_dict(data: dict) -> StitchedCurve:
    try:
        records = data["pieces"]
        r = int(data["r"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad approximation record: {exc}") from exc
    pieces = []
    for rec in records:
        kind = rec.get("kind")
        if kind == "samples":
            sub = {"format": "curve/1", "kind": "samples", "r": r,
                   "samples": rec["samples"]}
            s = sampled_curve_from_dict(sub)
            if s.dxs is None or s.dys is None:
                raise SchemaError("approximation sample pieces need derivatives")
            pieces.append(SampledFragment(s.times, s.xs, s.ys, s.dxs, s.dys))
        elif kind == "curve":
            sub = {"format": "curve/1", "kind": "segments", **rec}
            curve = _segments_curve_from_dict(sub)
            if not isinstance(curve, HorizontalCurve):
                raise SchemaError("approximation curve pieces must be free-group curves")
            pieces.append(CurveFragment(curve))
        else:
            raise SchemaError(f"unknown approximation piece kind '{kind}'")
    try:
        return StitchedCurve(tuple(pieces))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def object_from_dict(data: dict):
    """Dispatch a loaded file to the matching object."""
    fmt = data.get("format")
    if fmt == "curve/1":
        kind = data.get("kind")
        if kind == "samples":
            return sampled_curve_from_dict(data)
        if kind == "segments":
            return _segments_curve_from_dict(data)
        raise SchemaError(f"unknown curve kind '{kind}'")
    if fmt == "approximation/1":
        return stitched_from_dict(data)
    if fmt == "structure/1":
        return structure_from_dict(data)
    raise SchemaError(f"unknown format '{fmt}'")


# ---------------------------------------------------------------------------
# boundary data and reports
# ---------------------------------------------------------------------------


def boundary_from_dict(data: dict) -> dict:
    """Endpoint data (a, b, points, derivatives) of a boundary file."""
    if data.get("format") != "boundary/1":
        raise SchemaError("expected a boundary/1 file")
    try:
        a = float(data["a"])
        b = float(data["b"])
        out = {"a": a, "b": b}
        for key in ("ga", "gb", "dga", "dgb"):
            rec = data[key]
            out[key] = (np.array(rec["x"], float), np.array(rec["y"], float))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad boundary file: {exc}") from exc
    return out


def report_to_dict(report: ApproximationReport, config_echo: dict | None = None) -> dict:
    gaps = []
    for g in report.gaps:
        gaps.append(
            {
                "a": _num(g.a),
                "b": _num(g.b),
                "eps": _num(g.eps),
                "c_ratio": _num(g.c_ratio),
                "measured_dev": _num(g.measured_dev),
                "boundary_residual": _num(g.boundary_residual),
                "horizontality_residual": _num(g.horizontality_residual),
                "junction_jump": _num(g.junction_jump),
                "error": g.error,
            }
        )
    return {
        "format": "report/1",
        "tool": "carnot2",
        "version": __version__,
        "config": {
            "eta": _num(report.eta),
            "delta": _num(report.delta),
            "epsilon": _num(report.epsilon),
            **(config_echo or {}),
        },
        "k_intervals": [[_num(a), _num(b)] for a, b in report.k_intervals],
        "gaps": gaps,
        "disagreement_measure": _num(report.disagreement_measure),
        "max_derivative_jump": _num(report.max_derivative_jump),
        "horizontality_residual": _num(report.horizontality_residual),
        "feasible": report.feasible,
        "agreement_exact": report.agreement_exact,
        "ok": report.ok,
    }


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _csv_header(r: int, vert_cols) -> list[str]:
    return (["t"] + [f"x{k}" for k in range(1, r + 1)] + list(vert_cols)
            + [f"dx{k}" for k in range(1, r + 1)])


def _vert_cols_free(r: int) -> list[str]:
    from .group import vertical_pairs

    return [f"y_{i}_{j}" for i, j in vertical_pairs(r)]


def _vert_cols_general(m: int) -> list[str]:
    return [f"z{k}" for k in range(1, m + 1)]


def write_csv(path: str, obj, grid: int = 64):
    """Dense samples of a curve-like object: t, horizontal, vertical,
    horizontal derivative.  Sampled pieces emit their own samples; symbolic
    pieces emit ``grid`` rows per segment."""
    rows = []
    if isinstance(obj, SampledCurve):
        r, vert = obj.r, _vert_cols_free(obj.r)
        dxs = obj.dxs if obj.dxs is not None else np.full_like(obj.xs, np.nan)
        for k, t in enumerate(obj.times):
            rows.append([t, *obj.xs[k], *obj.ys[k], *dxs[k]])
    elif isinstance(obj, TargetSampledCurve):
        r, vert = obj.structure.r, _vert_cols_general(obj.structure.m)
        da = obj.da if obj.da is not None else np.full_like(obj.a, np.nan)
        for k, t in enumerate(obj.times):
            rows.append([t, *obj.a[k], *obj.b[k], *da[k]])
    elif isinstance(obj, GeneralHorizontalCurve):
        r, vert = obj.structure.r, _vert_cols_general(obj.structure.m)
        rows = _curve_rows(obj, grid)
    elif isinstance(obj, HorizontalCurve):
        r, vert = obj.r, _vert_cols_free(obj.r)
        rows = _curve_rows(obj, grid)
    elif isinstance(obj, StitchedCurve):
        r = None
        vert = None
        for piece in obj.pieces:
            if isinstance(piece, SampledFragment):
                r = piece.xs.shape[1]
                vert = _vert_cols_free(r)
                for k, t in enumerate(piece.times):
                    rows.append([t, *piece.xs[k], *piece.ys[k], *piece.dxs[k]])
            else:
                r = piece.curve.r
                vert = _vert_cols_free(r)
                rows.extend(_curve_rows(piece.curve, grid))
    else:
        raise TypeError(f"cannot emit CSV for {type(obj).__name__}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_csv_header(r, vert))
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _curve_rows(curve, grid: int) -> list:
    rows = []
    knots = curve.base.knot_times
    for k, seg in enumerate(curve.base.segments):
        ts = knots[k] + np.linspace(0.0, seg.duration, grid)
        vals = curve.value(ts)
        der = curve.derivative(ts)
        if isinstance(curve, GeneralHorizontalCurve):
            xs, ys, dxs = vals.a, vals.b, der[0]
        else:
            xs, ys, dxs = vals.x, vals.y, der.x
        for idx, t in enumerate(ts):
            rows.append([t, *xs[idx], *ys[idx], *dxs[idx]])
    return rows
