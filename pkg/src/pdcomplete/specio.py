"""File formats: kernel spec files (JSON) and matrix files (CSV).

Spec files carry a partial kernel as a list of 1-based ``(i, j, value)``
entries plus an optional cover, tree, or stationary block.  Listed pairs are
auto-mirrored; conflicting mirror values or missing diagonal entries are
rejected with the offending 1-based pair in the message.  Matrices are CSV
with a header row of labels and 17 significant digits, which round-trips
doubles exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .completion import PartialKernel
from .errors import StructuralError
from .graphdomain import DomainPattern, validate_junction_tree, validate_serrated
from .stationary import StationaryFunction

FORMAT_VERSION = "1"


@dataclass(frozen=True)
class KernelSpec:
    """Parsed contents of a kernel spec file."""

    kernel: PartialKernel | None
    cover: object | None  # SerratedCover
    tree: object | None  # JunctionTree
    stationary: StationaryFunction | None
    labels: tuple


def _require(cond, msg):
    if not cond:
        raise StructuralError(msg)


def parse_spec(data):
    """Build validated objects from a decoded spec dictionary."""
    _require(isinstance(data, dict), "spec file must hold a JSON object")
    version = str(data.get("version", FORMAT_VERSION))
    _require(version == FORMAT_VERSION, f"unsupported format version {version!r}")

    stationary = None
    if "stationary" in data:
        block = data["stationary"]
        _require(isinstance(block, dict), "stationary block must be an object")
        _require("samples" in block and "delta" in block,
                 "stationary block needs 'samples' and 'delta'")
        stationary = StationaryFunction(block["samples"], block["delta"])

    n = data.get("n")
    if n is None:
        _require(stationary is not None,
                 "spec file needs a point count 'n' or a stationary block")
        return KernelSpec(None, None, None, stationary, ())
    n = int(n)
    _require(n >= 1, "point count must be positive")

    labels = data.get("labels")
    if labels is None:
        labels = tuple(str(i + 1) for i in range(n))
    else:
        _require(len(labels) == n, f"{len(labels)} labels for n={n}")
        labels = tuple(str(s) for s in labels)

    entries = data.get("entries", [])
    values = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for rec in entries:
        _require(len(rec) == 3, f"entry {rec!r} is not (i, j, value)")
        i, j, val = int(rec[0]), int(rec[1]), float(rec[2])
        _require(1 <= i <= n and 1 <= j <= n,
                 f"entry ({i}, {j}) outside 1..{n}")
        a, b = i - 1, j - 1
        if mask[a, b] and values[a, b] != val:
            raise StructuralError(
                f"conflicting values for pair ({i}, {j}): "
                f"{values[a, b]!r} vs {val!r}"
            )
        values[a, b] = values[b, a] = val
        mask[a, b] = mask[b, a] = True
    for d in range(n):
        _require(mask[d, d], f"diagonal entry ({d + 1}, {d + 1}) is missing")
    pattern = DomainPattern(mask)
    kernel = PartialKernel(pattern, values, labels)

    cover = None
    tree = None
    if "cover" in data and "tree" in data:
        raise StructuralError("spec file may carry a cover or a tree, not both")
    if "cover" in data:
        blocks = [[int(i) - 1 for i in b] for b in data["cover"]]
        cover = validate_serrated(blocks, pattern)
    if "tree" in data:
        t = data["tree"]
        _require(isinstance(t, dict) and "bags" in t and "edges" in t,
                 "tree block needs 'bags' and 'edges'")
        bags = [[int(i) - 1 for i in b] for b in t["bags"]]
        edges = [(int(a) - 1, int(b) - 1) for a, b in t["edges"]]
        tree = validate_junction_tree(bags, edges, pattern)

    return KernelSpec(kernel, cover, tree, stationary, labels)


def read_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return parse_spec(data)
    except (TypeError, KeyError) as exc:
        raise StructuralError(f"malformed spec file {path}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, StructuralError):
            raise
        raise StructuralError(f"malformed spec file {path}: {exc}") from exc


def spec_to_dict(kernel=None, cover=None, tree=None, stationary=None, labels=None):
    """Spec dictionary for writing; inverse of :func:`parse_spec`."""
    data = {"version": FORMAT_VERSION}
    if kernel is not None:
        n = kernel.n
        data["n"] = n
        if labels is None and kernel.labels != tuple(range(n)):
            labels = [str(s) for s in kernel.labels]
        if labels is not None:
            data["labels"] = list(labels)
        entries = []
        for i in range(n):
            for j in range(i, n):
                if kernel.pattern.mask[i, j]:
                    entries.append([i + 1, j + 1, float(kernel.values[i, j])])
        data["entries"] = entries
    if cover is not None:
        data["cover"] = [[i + 1 for i in b] for b in cover.blocks]
    if tree is not None:
        data["tree"] = {
            "bags": [[i + 1 for i in b] for b in tree.bags],
            "edges": [[a + 1, b + 1] for a, b in tree.edges],
        }
    if stationary is not None:
        data["stationary"] = {
            "samples": [float(v) for v in stationary.samples],
            "delta": float(stationary.delta),
        }
    return data


def write_spec(path, **kwargs):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(**kwargs), fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_matrix_csv(values, labels=None):
    """CSV text with a header row of labels and 17-significant-digit entries."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if labels is None:
        labels = [str(i + 1) for i in range(n)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([str(s) for s in labels])
    for row in values:
        writer.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def write_matrix_csv(path, values, labels=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_matrix_csv(values, labels))


def read_matrix_csv(path):
    """Read a matrix CSV; returns (values, labels)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise StructuralError(f"matrix file {path} is empty")
    labels = tuple(rows[0])
    n = len(labels)
    body = rows[1:]
    if len(body) != n:
        raise StructuralError(
            f"matrix file {path} has {len(body)} rows for {n} columns"
        )
    values = np.empty((n, n))
    for i, row in enumerate(body):
        if len(row) != n:
            raise StructuralError(f"row {i + 2} of {path} has {len(row)} fields")
        values[i] = [float(v) for v in row]
    return values, labels


def dump_report_json(data):
    """Deterministic JSON for reports: sorted keys, repr-exact floats."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"
