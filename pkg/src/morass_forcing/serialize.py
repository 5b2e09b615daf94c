"""JSON documents for morasses and conditions, canonical dumping, DOT export."""

from __future__ import annotations

import json
import os
import re
from typing import Any, Mapping

from .errors import RejectedInput
from .morass import Amalgam, Morass, Successor, build_canonical
from .report import jsonable


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def morass_to_doc(M: Morass) -> dict:
    steps = []
    for step in M.steps:
        if isinstance(step, Successor):
            steps.append({"kind": "successor", "delta": step.delta, "f": list(step.f)})
        else:
            steps.append({"kind": "amalgam", "family": sorted(list(m) for m in step.family)})
    return {"height": M.height, "thetas": list(M.thetas), "steps": steps}


def morass_from_doc(doc: Mapping) -> Morass:
    try:
        thetas = [int(t) for t in doc["thetas"]]
        steps = []
        for raw in doc["steps"]:
            kind = raw["kind"]
            if kind == "successor":
                steps.append(Successor(int(raw["delta"]), tuple(int(v) for v in raw["f"])))
            elif kind == "amalgam":
                steps.append(Amalgam(tuple(tuple(int(v) for v in m) for m in raw["family"])))
            else:
                raise RejectedInput(f"unknown step kind {kind!r}")
        height = int(doc.get("height", len(steps)))
    except (KeyError, TypeError, ValueError) as exc:
        raise RejectedInput(f"malformed morass document: {exc!r}") from None
    if height != len(steps):
        raise RejectedInput(f"height {height} but {len(steps)} steps")
    return Morass(thetas, steps)


_BUILTIN = re.compile(r"^(?:M(\d+)|doubling:(\d+))$")


def load_morass(source: str) -> Morass:
    """A path to a morass document, or a builtin name ``M<h>`` /
    ``doubling:<h>`` for the doubling morass of height ``h``."""
    if os.path.exists(source):
        with open(source) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise RejectedInput(f"{source}: not JSON ({exc})") from None
        return morass_from_doc(doc)
    m = _BUILTIN.match(os.path.splitext(os.path.basename(source))[0])
    if m:
        return build_canonical(int(m.group(1) or m.group(2)))
    raise RejectedInput(f"no morass file or builtin named {source!r}")


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise RejectedInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise RejectedInput(f"{path}: not JSON ({exc})") from None


def morass_to_dot(M: Morass) -> str:
    """Tree of the morass: one rank per level, an edge from each node to its
    images one level up, labeled by the index of the step map used."""
    lines = ["digraph morass {", "  rankdir=BT;", "  node [shape=circle, fontsize=10];"]
    for level in range(M.height + 1):
        names = " ".join(f"\"{level},{nu}\";" for nu in range(M.thetas[level]))
        lines.append(f"  {{ rank=same; {names} }}")
    for alpha in range(M.height):
        edges: dict[tuple[int, int], list[int]] = {}
        for k, g in enumerate(M.step_maps(alpha)):
            for nu, tau in enumerate(g.values):
                edges.setdefault((nu, tau), []).append(k)
        for (nu, tau), labels in sorted(edges.items()):
            style = ", style=bold" if nu != tau else ""
            label = ",".join(map(str, labels))
            lines.append(f"  \"{alpha},{nu}\" -> \"{alpha + 1},{tau}\" [label=\"{label}\"{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
