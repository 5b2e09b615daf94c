"""Shared CLI plumbing for the CLI and acceptance tests."""

import contextlib
import io
import json
import os

from morass_forcing.cli import main


def run_cli(argv):
    """Run the CLI in-process; return (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main([str(a) for a in argv])
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


def write_inputs(root):
    """Condition and morass documents used by the verb list."""
    files = {
        "delta.json": {"a": [3], "b": [1], "f": [[3, 1, 4]]},
        "sba.json": {"x": [1, 3], "lt": [[1, 3]], "B": 2},
        "M2.json": None,
    }
    paths = {}
    for name, doc in files.items():
        path = os.path.join(root, name)
        if doc is None:
            code, text, _ = run_cli(["morass", "gen", "--height", 2])
            assert code == 0
            with open(path, "w") as fh:
                fh.write(text)
        else:
            with open(path, "w") as fh:
                json.dump(doc, fh)
        paths[name] = path
    return paths


def verb_runs(paths):
    """One fixed invocation per verb, with its expected exit code."""
    m2 = paths["M2.json"]
    return [
        (["morass", "gen", "--height", 3], 0),
        (["morass", "gen", "--height", 3, "--strategy", "random", "--seed", 7, "--theta-cap", 12], 0),
        (["morass", "gen", "--height", 3, "--strategy", "custom", "--deltas", "0,-,1"], 0),
        (["morass", "dot", "--morass", m2], 0),
        (["check", "morass", m2], 0),
        (["check", "fs", "--fixture", "subset", "--morass", m2], 0),
        (["check", "delta", paths["delta.json"], "--morass", m2], 0),
        (["check", "sba", paths["sba.json"], "--morass", m2], 0),
        (["experiment", "propagation", "--fixture", "harmonized-cohen", "--morass", m2], 0),
        (["experiment", "dense", "--fixture", "subset", "--morass", m2], 0),
        (["experiment", "ccc", "--fixture", "harmonized-cohen", "--morass", m2, "--seed", 3, "--trials", 40], 0),
        (["experiment", "generic", "--morass", m2, "--seed", 1, "--steps", 50], 0),
        (["experiment", "order-generic", "--morass", m2, "--seed", 1], 0),
        (["experiment", "order-generic", "--morass", m2, "--seed", 1, "--format", "dot"], 0),
        (["experiment", "delta-lemmas", "--morass", m2, "--max-a", 1, "--max-b", 2], 0),
        (["experiment", "sba-lemmas", "--morass", m2, "--max-x", 2, "--seed", 4], 0),
        (["experiment", "dp", "--morass", m2, "--seed", 2, "--samples", 300], 0),
        (["experiment", "antichain", "--morass", m2], 0),
        (["enumerate", "delta", "--morass", m2], 0),
        (["enumerate", "sba", "--morass", m2], 0),
        (["mutate", "list"], 0),
        (["mutate", "run", "pi-flip", "--seed", 5], 1),
        (["mutate", "run", "stale-colors", "--seed", 5], 2),
    ]


def snapshot(directory):
    """File name to bytes for every file in a directory."""
    out = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as fh:
            out[name] = fh.read()
    return out
