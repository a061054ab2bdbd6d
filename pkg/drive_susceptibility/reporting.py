"""CSV and JSON writers with config-hash provenance.

Every file starts with (CSV) or carries (JSON) the hash of the validated
configuration. Floats are written with ``repr`` and JSON keys are sorted, so
the same configuration and seed reproduce the same bytes.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence, Union

from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

from .errors import ParameterError
from .model import SpinSystemParams
from .sequence import DecaySeries

logger = logging.getLogger(__name__)

HASH_PREFIX = "# config_hash="
PARAMS_PREFIX = "# params="
DECAY_COLUMNS = ("n", "t", "mz", "my_leakage")


def _payload(data: Union[BaseModel, Mapping[str, Any], Sequence[Any]]) -> Any:
    if isinstance(data, BaseModel):
        return data.model_dump(mode="json")
    if isinstance(data, Mapping):
        return {key: _payload(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_payload(item) for item in data]
    return data


def write_csv(
    path: Union[str, Path],
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config_hash: str,
    comments: Sequence[str] = (),
) -> Path:
    """Hash line, then ``comments`` as further "#" lines, then the table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    buffer.write(f"{HASH_PREFIX}{config_hash}\n")
    for comment in comments:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    path.write_text(buffer.getvalue(), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def write_json(
    path: Union[str, Path],
    data: Union[BaseModel, Mapping[str, Any], Sequence[Any]],
    config_hash: str,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"config_hash": config_hash, "result": _payload(data)}
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _flatten(prefix: str, value: Any, rows: List[List[Any]]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, rows)
    else:
        rows.append([prefix, value])


def write_report(
    path_stem: Union[str, Path],
    data: Union[BaseModel, Mapping[str, Any], Sequence[Any]],
    config_hash: str,
    fmt: str = "json",
) -> Path:
    """Write ``data`` as JSON or as flattened key/value CSV."""
    path_stem = Path(path_stem)
    if fmt == "json":
        return write_json(path_stem.with_suffix(".json"), data, config_hash)
    if fmt == "csv":
        rows: List[List[Any]] = []
        _flatten("", _payload(data), rows)
        return write_csv(path_stem.with_suffix(".csv"), ("key", "value"), rows, config_hash)
    raise ParameterError(f"unknown output format '{fmt}'")


def write_decay_series_csv(
    path: Union[str, Path], series: DecaySeries, config_hash: str
) -> Path:
    """Table of ``series``; the parameter snapshot goes in a "# params=" line."""
    comments: List[str] = []
    if series.params is not None:
        # json.dumps keeps infinite T1/T2 as Infinity
        snapshot = json.dumps(series.params.model_dump(), sort_keys=True)
        comments.append(f"params={snapshot}")
    return write_csv(path, DECAY_COLUMNS, series.rows(), config_hash, comments)


def _read_params(path: Union[str, Path], line: str) -> SpinSystemParams:
    try:
        return SpinSystemParams.model_validate(json.loads(line[len(PARAMS_PREFIX) :]))
    except (ValueError, ValidationError) as exc:
        raise ParameterError(f"{path}: unreadable parameter snapshot: {exc}") from exc


def read_decay_series_csv(path: Union[str, Path]) -> DecaySeries:
    """Read a DecaySeries written by ``write_decay_series_csv``."""
    lines = []
    params = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith(PARAMS_PREFIX):
            params = _read_params(path, line)
        elif line.strip() and not line.startswith("#"):
            lines.append(line)
    reader = csv.DictReader(lines)
    missing = set(DECAY_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ParameterError(f"{path}: missing columns {sorted(missing)}")
    records = list(reader)
    if not records:
        raise ParameterError(f"{path}: no data rows")
    n = tuple(int(r["n"]) for r in records)
    t = tuple(float(r["t"]) for r in records)
    return DecaySeries(
        n=n,
        t=t,
        mz=tuple(float(r["mz"]) for r in records),
        my_leakage=tuple(float(r["my_leakage"]) for r in records),
        period=t[0] / n[0],
        params=params,
    )


def print_table(
    title: str,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    console: Console = None,
) -> None:
    console = console or Console()
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)
