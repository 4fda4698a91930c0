"""Reading and writing the JSON and CSV documents used by the CLI."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .flowbuild import AssembledPotential, FlowData
from .recursion import FreeTermSpec, SeedSpec, SeriesSolution
from .trigser import TrigSeries, series_from_doc, series_to_doc


class DocumentError(ValueError):
    """A document could not be parsed or violates its schema."""


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from exc


def _parse(path, parser):
    doc = read_json(path)
    try:
        return parser(doc)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"{path}: {exc}") from exc


def read_series(path) -> TrigSeries:
    return _parse(path, series_from_doc)


def write_series(path, s: TrigSeries) -> None:
    write_json(path, series_to_doc(s))


def read_seed(path) -> SeedSpec:
    return _parse(path, SeedSpec.from_doc)


def read_free(path) -> FreeTermSpec:
    return _parse(path, FreeTermSpec.from_doc)


def read_solution(path) -> SeriesSolution:
    return _parse(path, SeriesSolution.from_doc)


def read_potential(path) -> AssembledPotential:
    return _parse(path, AssembledPotential.from_doc)


def read_flow(path) -> FlowData:
    return _parse(path, FlowData.from_doc)


def write_grid_csv(path, values: np.ndarray) -> None:
    """Row-major CSV, first line ``N=<size>``; row j is x_j, column k is y_k."""
    N = values.shape[0]
    lines = [f"N={N}"]
    lines += [",".join(repr(float(v)) for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> np.ndarray:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("N="):
        raise DocumentError(f"{path}: missing N=<size> header")
    N = int(text[0][2:])
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:] if line])
    if data.shape != (N, N):
        raise DocumentError(f"{path}: expected {N}x{N} values, got {data.shape}")
    return data
