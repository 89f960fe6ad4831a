"""
CSV output with fixed, versioned schemas.

Each file starts with one comment line carrying the schema name, version
and column units, followed by the header row. Numbers are written with 17
significant digits, which round-trips every float64 exactly and does not
depend on the locale.
"""
from __future__ import annotations

import csv
import io
import sys
from dataclasses import astuple

from .config import FORMAT_VERSION

SCHEMAS = {
    "trajectory": (
        ("s", "length"), ("p1", "1"), ("p2", "1"), ("p3", "1"),
        ("k1", "1"), ("k2", "1"), ("k3", "1"),
    ),
    "sweep": (
        ("lambda", "1"), ("T", "1"), ("dT_dlambda", "1"),
        ("bound", "1"), ("approx", "1"), ("ratio", "1"),
    ),
    "report": (
        ("T0", "1"), ("T_eps", "1"), ("dT_deps", "1"), ("eps_used", "1"),
        ("bound_schwartz", "1"), ("bound_pauli", "1"), ("saturation_ratio", "1"),
    ),
}


def fmt(x) -> str:
    return format(float(x), ".17g")


def columns(schema):
    return [name for name, _ in SCHEMAS[schema]]


def render(schema, rows) -> str:
    cols = SCHEMAS[schema]
    buf = io.StringIO()
    units = " ".join(f"{n}[{u}]" for n, u in cols)
    buf.write(f"# modbound schema={schema} version={FORMAT_VERSION} units: {units}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([n for n, _ in cols])
    for row in rows:
        row = list(row)
        if len(row) != len(cols):
            raise ValueError(f"{schema} rows have {len(cols)} columns, got {len(row)}")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write(schema, rows, path):
    """Write rows to ``path`` ('-' means stdout)."""
    text = render(schema, rows)
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def trajectory_rows(s, bloch, khat):
    for i in range(len(s)):
        yield (s[i], *bloch[i], *khat[i])


def sweep_rows(records):
    return (astuple(r) for r in records)


def report_rows(report):
    return [astuple(report)]


def read(path):
    """Parse a file written by ``write``: returns (schema name, header, rows of floats)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        schema = first.split("schema=", 1)[1].split()[0]
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader]
    return schema, header, rows
