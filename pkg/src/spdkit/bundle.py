"""Labeled collections of SPD matrices and their JSON file format.

A bundle document is UTF-8 JSON::

    {
      "n": 2,
      "items": [
        {"label": "X1", "rows": [[0.1406, 0.0347], [0.0347, 0.1779]]}
      ],
      "weights": [1.0]
    }

``weights`` is optional. Floats are written in the shortest decimal form
that round-trips exactly (at most 17 significant digits), so write/parse is
value-exact.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParseError, ValidationError
from .pdcore import SpdMatrix, make_spd

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MatrixBundle:
    n: int
    items: tuple
    weights: tuple = None

    def __post_init__(self):
        items = tuple((str(label), make_spd(A)) for label, A in self.items)
        labels = [label for label, _ in items]
        if len(set(labels)) != len(labels):
            raise ValidationError("labels must be unique")
        for label, A in items:
            if A.n != self.n:
                raise ValidationError(f"matrix is {A.n}x{A.n}, bundle n={self.n}", label=label)
        object.__setattr__(self, "items", items)
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(items):
                raise ValidationError(f"{len(w)} weights for {len(items)} items")
            if any(not x >= 0 for x in w) or abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
                raise ValidationError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_matrices(cls, matrices, labels=None, weights=None):
        mats = [make_spd(A) for A in matrices]
        if not mats:
            raise ValidationError("bundle must contain at least one matrix")
        if labels is None:
            labels = [f"X{i + 1}" for i in range(len(mats))]
        return cls(mats[0].n, tuple(zip(labels, mats)), weights)

    def __len__(self):
        return len(self.items)

    @property
    def labels(self):
        return [label for label, _ in self.items]

    @property
    def matrices(self):
        return [A for _, A in self.items]

    def stack(self):
        return np.stack([A.data for A in self.matrices])


def _fmt(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("bundle entries must be finite")
    return repr(x)


def dumps_bundle(bundle):
    lines = ["{", f'  "n": {bundle.n},', '  "items": [']
    for k, (label, A) in enumerate(bundle.items):
        rows = ", ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in A.data)
        sep = "," if k + 1 < len(bundle.items) else ""
        lines.append(f'    {{"label": {json.dumps(label)}, "rows": [{rows}]}}{sep}')
    if bundle.weights is None:
        lines.append("  ]")
    else:
        lines.append("  ],")
        lines.append('  "weights": [' + ", ".join(_fmt(w) for w in bundle.weights) + "]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_bundle(bundle, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_bundle(bundle))


def _number(value, locus):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {type(value).__name__}", locus)
    return float(value)


def loads_bundle(text):
    """Parse a bundle document; every matrix must pass SPD validation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "document")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError("must be a positive integer", "n")
    items = doc.get("items")
    if not isinstance(items, list) or not items:
        raise ParseError("must be a nonempty array", "items")
    parsed = []
    for i, item in enumerate(items):
        where = f"items[{i}]"
        if not isinstance(item, dict):
            raise ParseError("must be an object", where)
        label = item.get("label")
        if not isinstance(label, str):
            raise ParseError("must be a string", f"{where}.label")
        rows = item.get("rows")
        if not isinstance(rows, list) or len(rows) != n:
            raise ParseError(f"must be an array of {n} rows", f"{where}.rows")
        mat = np.empty((n, n))
        for r, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise ParseError(f"must be an array of {n} numbers", f"{where}.rows[{r}]")
            for c, v in enumerate(row):
                mat[r, c] = _number(v, f"{where}.rows[{r}][{c}]")
        try:
            parsed.append((label, SpdMatrix(mat)))
        except InputError as exc:
            raise ValidationError(str(exc), label=label) from None
    weights = doc.get("weights")
    if weights is not None:
        if not isinstance(weights, list):
            raise ParseError("must be an array", "weights")
        weights = [_number(w, f"weights[{k}]") for k, w in enumerate(weights)]
    return MatrixBundle(n, tuple(parsed), weights)


def parse_bundle(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text ({exc.reason})", str(path)) from None
    return loads_bundle(text)
