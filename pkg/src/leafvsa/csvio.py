"""Deterministic CSV output.

Floats are written in their shortest round-trip form (``repr``), so reading a
file back with ``float()`` reproduces every value bit for bit. Rows end in
``\\n`` and never carry a trailing delimiter.
"""

import csv
import hashlib
import io
import math
import numbers


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(value)


def render_csv(records, columns):
    """CSV text for ``records`` (mappings) restricted to ``columns``, in order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        try:
            writer.writerow([format_value(rec[c]) for c in columns])
        except KeyError as exc:
            raise ValueError(f"record is missing column {exc.args[0]!r}") from None
    return buf.getvalue()


def write_csv(records, path, columns):
    """Write records to ``path``. Returns the SHA-256 of the bytes written."""
    text = render_csv(records, columns)
    data = text.encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}") from exc
    return hashlib.sha256(data).hexdigest()


def read_csv(path):
    """Read a file written by :func:`write_csv`; numeric fields become floats."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = {}
            for name, text in zip(header, raw):
                try:
                    row[name] = float(text)
                except ValueError:
                    row[name] = text
            rows.append(row)
    return header, rows
