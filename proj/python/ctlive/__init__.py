"""Constant-time checking of synchronous hardware designs.

Every entry point returns the JSON report of the C++ pipeline as a dict.
Inputs are paths, ``bench:<name>`` for a bundled benchmark, or
``(name, text)`` pairs.
"""

import json
import os

from . import _ctlive

__all__ = ["run", "check", "simulate", "oracle", "races", "bmc", "emit_ir", "emit_vc",
           "benchmarks", "bundled_file", "version"]

EXIT_CODES = {"Verified": 0, "Violation": 1, "CannotProve": 2, "Racy": 3, "Ill-formed": 3, "Error": 4}


def version():
    return _ctlive.version()


def bundled_file(name):
    for fname, text in _ctlive.bundled_files():
        if fname == name:
            return text
    raise KeyError(name)


def benchmarks():
    """Names of the bundled benchmark circuits."""
    return sorted(f[:-2] for f, _ in _ctlive.bundled_files() if f.endswith(".v"))


def _read(item):
    if isinstance(item, tuple):
        return item
    item = os.fspath(item)
    if item.startswith("bench:"):
        name = item[len("bench:"):]
        if "." not in name:
            name += ".v"
        return name, bundled_file(name)
    with open(item, encoding="utf-8") as f:
        return item, f.read()


def _text(item):
    return None if item is None else _read(item)[1]


def run(mode, inputs, *, annot=None, hints=None, schedule=None, **options):
    if isinstance(inputs, (str, os.PathLike, tuple)):
        inputs = [inputs]
    options["annot"] = _text(annot)
    options["hints"] = _text(hints)
    if schedule is not None:
        options["schedule"] = schedule if isinstance(schedule, dict) else json.loads(_text(schedule))
    report = _ctlive.run(mode, [_read(i) for i in inputs], json.dumps(options))
    return json.loads(report)


def check(inputs, **kw):
    return run("check", inputs, **kw)


def simulate(inputs, **kw):
    return run("simulate", inputs, **kw)


def oracle(inputs, **kw):
    return run("oracle", inputs, **kw)


def races(inputs, **kw):
    return run("races", inputs, **kw)


def bmc(inputs, **kw):
    return run("bmc", inputs, **kw)


def emit_ir(inputs, **kw):
    return run("emit-ir", inputs, **kw)["output"]


def emit_vc(inputs, **kw):
    return run("emit-vc", inputs, **kw)["output"]
