"""Plain-text output: atomic writes, JSON and CSV with 17 significant digits,
and the generator-matrix file (one JSON header line, then CSV)."""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .discretize import GeneratorMatrix, RadialGrid
from .errors import ConfigError
from .model import ModelSpec, WeightSpec
from .quadrature import composite, sphere_area


def fmt(x):
    return "%.17g" % x


def atomic_write(path, text):
    """Write to a temporary file in the target directory, then rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _plain(obj):
    """numpy scalars and arrays to Python objects."""
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written as %.17g; non-finite floats become null."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        s = fmt(obj)
        return s if any(c in s for c in ".e") else s + ".0"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(dumps(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(x, indent, _level + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj):
    return atomic_write(path, dumps(obj) + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    return atomic_write(path, csv_text(header, rows))


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


# -- model and grid --------------------------------------------------------

def spec_from_dict(d):
    w = dict(d.get("weight", {"kind": "unit"}))
    return ModelSpec(d=int(d["d"]), gamma=float(d["gamma"]), ell_b=float(d["ell_b"]), weight=WeightSpec(**w))


def grid_from_dict(d):
    edges = np.array(d["edges"], float)
    order = int(d["order"])
    r, h = composite(edges, order)
    w = sphere_area(int(d["d"])) * r ** (int(d["d"]) - 1) * h
    return RadialGrid(r, w, int(d["n_angle"]), int(d["d"]), float(d["r_max"]), edges, order)


# -- generator matrix -------------------------------------------------------

def save_generator(path, gen):
    """Line 1: JSON header. Then CSV with columns r, sigma, gain_0 ... gain_{n-1}."""
    header = {"format": "boltzgap-generator/1", "normalization": gen.normalization,
              "spec": gen.spec.to_dict(), "grid": gen.grid.to_dict()}
    cols = ["r", "sigma"] + [f"gain_{j}" for j in range(gen.n)]
    rows = np.column_stack([gen.grid.nodes, gen.sigma, gen.gain])
    body = csv_text(cols, rows.tolist())
    return atomic_write(path, json.dumps(_plain(header)) + "\n" + body)


def load_generator(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"matrix file not found: {path}")
    with open(path, newline="") as fh:
        header = json.loads(fh.readline())
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    grid = grid_from_dict(header["grid"])
    if data.shape != (grid.n, grid.n + 2):
        raise ConfigError(f"matrix body has shape {data.shape}, expected {(grid.n, grid.n + 2)}")
    return GeneratorMatrix(data[:, 2:], data[:, 1], grid, spec_from_dict(header["spec"]),
                           header["normalization"], {"source": str(path)})


# -- reports ----------------------------------------------------------------

def write_bound_report(outdir, report, seed=None):
    """<quantity>.csv with the samples and <quantity>.json with the summary."""
    outdir = Path(outdir)
    write_csv(outdir / f"{report.quantity}.csv", report.columns, report.samples)
    summary = {"quantity": report.quantity, "sup_ratio": report.sup_ratio, "passed": report.passed,
               "tolerance": report.tolerance, "n_samples": len(report.samples), **report.meta}
    if seed is not None:
        summary["seed"] = seed
    write_json(outdir / f"{report.quantity}.json", summary)
    return summary


def write_spectrum(outdir, report, extra=None):
    outdir = Path(outdir)
    ev = report.eigenvalues
    write_csv(outdir / "eigenvalues.csv", ["re", "im"], np.column_stack([ev.real, ev.imag]).tolist())
    summary = {**report.summary(), **(extra or {}),
               "eigenvalues": [[float(z.real), float(z.imag)] for z in ev]}
    write_json(outdir / "spectrum.json", summary)
    return summary


def write_trajectory(path, traj):
    rows = np.column_stack([traj.times, traj.norms, traj.mass, traj.min_component])
    return write_csv(path, ["t", "norm", "mass", "min_component"], rows.tolist())
