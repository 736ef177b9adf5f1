"""Dataset files, run configurations and result tables.

Datasets and tables are comma-separated text with a header row. Floats are
written with ``repr`` so that re-reading a table reproduces it exactly.
Run configurations are JSON documents mirroring :class:`MCConfig`.
"""
from __future__ import annotations

import csv
import json
import math
import re
import typing
import warnings
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .errors import MissingColumnError, NonFiniteValueError, ParseError
from .simulation import DGPConfig, MCConfig, Sparsity
from .statistics import Dataset, Method


def load_dataset(path, center: bool = True, z_prefix: str = "Z", y_col: str = "Y", x_col: str = "X") -> Dataset:
    """Read ``Y``, ``X`` and instrument columns ``<prefix>1..<prefix>K``.

    With ``center`` (the default) the column means of ``Y``, ``X`` and every
    instrument are subtracted and recorded in ``metadata["shifts"]``.
    Row numbers in errors are file line numbers (the header is line 1).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        pattern = re.compile(re.escape(z_prefix) + r"(\d+)$")
        z_cols = sorted(
            ((int(m.group(1)), i) for i, h in enumerate(header) if (m := pattern.match(h))),
        )
        for name in (y_col, x_col):
            if name not in header:
                raise MissingColumnError(f"required column {name!r} not found in header")
        if not z_cols:
            raise MissingColumnError(f"no instrument columns with prefix {z_prefix!r}")
        iy, ix = header.index(y_col), header.index(x_col)
        iz = [i for _, i in z_cols]

        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(record)}", row=lineno)
            values = []
            for col, cell in zip(header, record):
                cell = cell.strip()
                if not cell:
                    raise ParseError("blank cell", row=lineno, col=col)
                try:
                    x = float(cell)
                except ValueError:
                    raise ParseError(f"cannot parse {cell!r} as a number", row=lineno, col=col) from None
                if not math.isfinite(x):
                    raise NonFiniteValueError(f"non-finite value {cell!r}", row=lineno, col=col)
                values.append(x)
            rows.append(values)
    if len(rows) < 2:
        raise ParseError("need at least two data rows")

    A = np.array(rows)
    Y, X, Z = A[:, iy], A[:, ix], A[:, iz]
    z_names = [header[i] for i in iz]
    meta = {"path": str(path), "instruments": z_names, "centered": bool(center)}
    if center:
        my, mx, mz = Y.mean(), X.mean(), Z.mean(axis=0)
        Y, X, Z = Y - my, X - mx, Z - mz
        meta["shifts"] = {"Y": float(my), "X": float(mx), "Z": [float(v) for v in mz]}
        flat = [name for name, col in zip(z_names, Z.T) if not np.any(col)]
        if flat:
            warnings.warn(f"constant instrument column(s) {', '.join(flat)} are all zero after centering")
    return Dataset(Y, X, Z, metadata=meta)


def write_dataset(data: Dataset, path, z_prefix: str = "Z") -> None:
    header = ["Y", "X"] + [f"{z_prefix}{k + 1}" for k in range(data.K)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for y, x, z in zip(data.Y, data.X, data.Z):
            w.writerow([repr(float(y)), repr(float(x))] + [repr(float(v)) for v in z])


# ------------------------------------------------------------------ tables


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(rows, fh, columns=None) -> None:
    """Write dataclass instances (or dicts) as CSV with a header row."""
    rows = list(rows)
    if columns is None:
        if not rows:
            raise ValueError("cannot infer columns from an empty table")
        first = rows[0]
        columns = list(first) if isinstance(first, dict) else [f.name for f in fields(first)]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = row if isinstance(row, dict) else asdict(row)
        w.writerow([_cell(d[c]) for c in columns])


_CONVERTERS = {int: int, float: float, str: str, bool: lambda s: s == "true"}


def read_rows(cls, fh) -> list:
    """Parse a CSV written by :func:`write_rows` back into ``cls`` instances."""
    hints = typing.get_type_hints(cls)
    reader = csv.DictReader(fh)
    names = [f.name for f in fields(cls)]
    if reader.fieldnames != names:
        raise ParseError(f"header {reader.fieldnames} does not match {cls.__name__} columns {names}")
    return [cls(**{k: _CONVERTERS[hints[k]](v) for k, v in rec.items()}) for rec in reader]


# ----------------------------------------------------------------- configs

_MC_KEYS = {f.name for f in fields(MCConfig)}
_DGP_KEYS = {f.name for f in fields(DGPConfig)}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ValueError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def mc_config_to_dict(cfg: MCConfig) -> dict:
    dgp = asdict(cfg.dgp)
    dgp["sparsity"] = {"kind": cfg.dgp.sparsity.kind, "q": cfg.dgp.sparsity.q}
    return {
        "dgp": dgp,
        "replications": cfg.replications,
        "alpha": cfg.alpha,
        "master_seed": cfg.master_seed,
        "methods": [m.value for m in cfg.methods],
        "gamma": cfg.gamma,
        "label": cfg.label,
    }


def mc_config_from_dict(d: dict) -> MCConfig:
    """Build an :class:`MCConfig`; unknown keys at any level are rejected."""
    _reject_unknown(d, _MC_KEYS, "run config")
    if "dgp" not in d:
        raise ValueError("run config needs a 'dgp' section")
    dgp = dict(d["dgp"])
    _reject_unknown(dgp, _DGP_KEYS, "dgp")
    sp = dgp.get("sparsity")
    if not isinstance(sp, dict):
        raise ValueError("dgp.sparsity must be an object with 'kind' and 'q'")
    _reject_unknown(sp, {"kind", "q"}, "dgp.sparsity")
    dgp["sparsity"] = Sparsity(**sp)
    rest = {k: v for k, v in d.items() if k != "dgp"}
    if "methods" in rest:
        rest["methods"] = tuple(Method.parse(m) for m in rest["methods"])
    return MCConfig(dgp=DGPConfig(**dgp), **rest)


def load_run_config(path) -> list:
    """Read a JSON run config: one MCConfig object, a list, or ``{"configs": [...]}``."""
    with Path(path).open() as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "configs" in doc:
        _reject_unknown(doc, {"configs"}, "run config file")
        doc = doc["configs"]
    if isinstance(doc, dict):
        doc = [doc]
    return [mc_config_from_dict(d) for d in doc]


def dump_run_config(configs, path=None) -> str:
    text = json.dumps({"configs": [mc_config_to_dict(c) for c in configs]}, indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
