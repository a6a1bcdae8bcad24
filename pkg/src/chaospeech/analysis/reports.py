"""JSON / CSV / gnuplot-data emitters for analysis results."""
import csv
import json
from pathlib import Path

import numpy as np


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def to_json(obj, path=None) -> str:
    text = json.dumps(_plain(obj), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(_plain(list(rows)))


def write_gnuplot(path, header, rows) -> None:
    """Whitespace-separated columns with a ``#`` header line."""
    with open(path, "w") as f:
        f.write("# " + " ".join(header) + "\n")
        for row in rows:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")
