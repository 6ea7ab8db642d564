"""File ingestion and emission: measurement CSV, candidate CSV, network JSON.

One CSV schema covers all three layer kinds; columns a kind does not use are
left blank. Floats are written with full (shortest round-trip) precision so
written files parse back to bit-identical values. Diagnostics cite 1-based
physical line numbers (the header is line 1).
"""

from __future__ import annotations

import csv
import json
from typing import Sequence

from .arch import Conv, FullyConnected, LayerSpec, LayerSpecError, NetworkSpec, Pool, parse_network
from .epr import CandidateArch
from .layermodel import MeasurementSample

CSV_HEADER = ("layer_type", "batch", "in_channels", "in_h", "in_w", "out_channels",
              "kernel", "stride", "padding", "in_size", "out_size", "channels",
              "runtime_ms", "power_w")

_INT_FIELDS = {
    "conv": ("batch", "in_channels", "in_h", "in_w", "out_channels", "kernel", "stride", "padding"),
    "fc": ("batch", "in_size", "out_size"),
    "pool": ("batch", "channels", "in_h", "in_w", "kernel", "stride", "padding"),
}


class DataError(ValueError):
    """A data file is malformed; the message cites the offending row."""


def _layer_to_columns(layer: LayerSpec) -> dict[str, str]:
    cols = {name: "" for name in CSV_HEADER}
    cols["layer_type"] = layer.kind
    for field in _INT_FIELDS[layer.kind]:
        cols[field] = str(getattr(layer, field))
    return cols


def write_measurements_csv(path, samples: Sequence[MeasurementSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        for s in samples:
            row = _layer_to_columns(s.layer)
            row["runtime_ms"] = repr(s.runtime_ms)
            row["power_w"] = repr(s.power_w)
            writer.writerow(row)


def _parse_int(row: dict, field: str, line: int, default: int | None = None) -> int:
    text = (row.get(field) or "").strip()
    if not text:
        if default is not None:
            return default
        raise DataError(f"row {line}: missing value for {field!r}")
    try:
        return int(text)
    except ValueError:
        raise DataError(f"row {line}: {field!r} must be an integer, got {text!r}") from None


def _parse_float(row: dict, field: str, line: int) -> float:
    text = (row.get(field) or "").strip()
    if not text:
        raise DataError(f"row {line}: missing value for {field!r}")
    try:
        return float(text)
    except ValueError:
        raise DataError(f"row {line}: {field!r} must be a number, got {text!r}") from None


def layer_from_row(row: dict, line: int) -> LayerSpec:
    kind = (row.get("layer_type") or "").strip()
    try:
        if kind == "conv":
            return Conv(batch=_parse_int(row, "batch", line),
                        in_channels=_parse_int(row, "in_channels", line),
                        in_h=_parse_int(row, "in_h", line),
                        in_w=_parse_int(row, "in_w", line),
                        out_channels=_parse_int(row, "out_channels", line),
                        kernel=_parse_int(row, "kernel", line),
                        stride=_parse_int(row, "stride", line),
                        padding=_parse_int(row, "padding", line, default=0))
        if kind == "fc":
            return FullyConnected(batch=_parse_int(row, "batch", line),
                                  in_size=_parse_int(row, "in_size", line),
                                  out_size=_parse_int(row, "out_size", line))
        if kind == "pool":
            return Pool(batch=_parse_int(row, "batch", line),
                        channels=_parse_int(row, "channels", line),
                        in_h=_parse_int(row, "in_h", line),
                        in_w=_parse_int(row, "in_w", line),
                        kernel=_parse_int(row, "kernel", line),
                        stride=_parse_int(row, "stride", line),
                        padding=_parse_int(row, "padding", line, default=0))
    except LayerSpecError as exc:
        raise DataError(f"row {line}: {exc}") from exc
    raise DataError(f"row {line}: unknown layer_type {kind!r}")


def read_measurements_csv(path) -> list[MeasurementSample]:
    """Parse a measurement CSV; rows tagged layer_type='total' are summary
    rows (as emitted by prediction reports) and are skipped."""
    samples = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("empty file: missing header row")
        missing = set(CSV_HEADER) - set(reader.fieldnames)
        if missing:
            raise DataError(f"header missing columns: {sorted(missing)}")
        for row in reader:
            line = reader.line_num
            if (row.get("layer_type") or "").strip() == "total":
                continue
            layer = layer_from_row(row, line)
            runtime = _parse_float(row, "runtime_ms", line)
            power = _parse_float(row, "power_w", line)
            try:
                samples.append(MeasurementSample(layer, runtime, power))
            except ValueError as exc:
                raise DataError(f"row {line}: {exc}") from exc
    if not samples:
        raise DataError("no measurement rows in file")
    return samples


def read_candidates_csv(path) -> list[CandidateArch]:
    """Parse `name,error,epi_mj` candidate rows (error as a fraction in [0,1])."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("empty file: missing header row")
        needed = {"name", "error", "epi_mj"}
        if not needed.issubset(set(reader.fieldnames)):
            raise DataError(f"candidate header must contain {sorted(needed)}")
        for row in reader:
            line = reader.line_num
            name = (row.get("name") or "").strip()
            if not name:
                raise DataError(f"row {line}: missing candidate name")
            try:
                out.append(CandidateArch(name=name,
                                         error=_parse_float(row, "error", line),
                                         epi_mj=_parse_float(row, "epi_mj", line)))
            except ValueError as exc:
                raise DataError(f"row {line}: {exc}") from exc
    if not out:
        raise DataError("no candidate rows in file")
    return out


def load_network(path) -> NetworkSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network(fh.read())


def dump_network(net: NetworkSpec, path) -> None:
    doc = {"name": net.name, "layers": []}
    for layer in net.layers:
        entry = {"type": layer.kind}
        for field in _INT_FIELDS[layer.kind]:
            entry[field] = getattr(layer, field)
        doc["layers"].append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
