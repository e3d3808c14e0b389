"""Model files and structured output.

Model files are JSON objects ``{"weights": [[...], [...], [...]]}`` laid out
like the lattice: rows are ``l = +1, 0, -1`` top to bottom and columns
``k = -1, 0, +1`` left to right.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import errors, model
from .config import DEFAULT, Tolerances


def weights_from_layout(rows) -> np.ndarray:
    """Visual 3x3 layout to the internal ``w[k+1, l+1]`` array."""
    a = np.array(rows, dtype=float)
    if a.shape != (3, 3):
        raise errors.ValidationError(f"weights must be 3x3, got shape {a.shape}")
    # layout[r][c] holds p_{k,l} with k = c - 1, l = 1 - r
    return a[::-1, :].T.copy()


def layout_from_weights(w) -> list[list[float]]:
    w = np.asarray(w, dtype=float)
    return w.T[::-1, :].tolist()


def load_model(path, tol: Tolerances = DEFAULT) -> model.StepSet:
    """Read and validate a model file.

    ``OSError`` propagates for unreadable files; malformed content raises
    :class:`ValidationError`.
    """
    with open(path) as fh:
        text = fh.read()
    return parse_model(text, tol)


def parse_model(text: str, tol: Tolerances = DEFAULT) -> model.StepSet:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise errors.ValidationError(f"model file is not valid JSON: {e}") from None
    if not isinstance(data, dict) or "weights" not in data:
        raise errors.ValidationError('model file needs a "weights" entry')
    return model.validate(weights_from_layout(data["weights"]), tol)


def dump_model(s: model.StepSet) -> str:
    return dumps({"weights": layout_from_weights(s.weights)})


# -- number formatting ------------------------------------------------------


def _num(x) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    out = format(x, ".17g")
    if "." not in out and "e" not in out:
        out += ".0"
    return out


def _encode(obj, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ","
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric rows on one line
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become ``null``.
    """
    return _encode(obj, indent, 0)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def grid_json(grid) -> dict:
    return {"meta": grid.meta, "values": grid.values}


def grid_csv(grid) -> str:
    return csv_text(["i", "j", "f"], grid.rows())


def curve_csv(sample) -> str:
    return csv_text(["param", "re_x0", "im_x0", "re_x1", "im_x1"], sample.rows())
