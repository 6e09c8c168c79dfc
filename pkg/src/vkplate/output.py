"""CSV step logs and legacy ASCII VTK snapshots."""

import csv
import io

import numpy as np

STEP_COLUMNS = ("n", "t", "phi", "diss", "incr_value", "iters", "grad_norm", "descent_slack")
_INT_COLUMNS = {"n", "iters"}


def _num(x):
    return format(float(x), ".16e")


def steps_csv_text(trace, tau=None):
    tau = trace.tau if tau is None else tau
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEP_COLUMNS)
    for r in trace.records:
        w.writerow([r.n, _num(r.n * tau), _num(r.phi), _num(r.diss), _num(r.incr_value),
                    r.iters, _num(r.grad_norm), _num(r.descent_slack)])
    return buf.getvalue()


def write_steps_csv(trace, tau, path):
    with open(path, "w", newline="") as fh:
        fh.write(steps_csv_text(trace, tau))


def read_steps_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k in _INT_COLUMNS else float(v)) for k, v in row.items()}
            for row in rows]


def write_vtk(state, magnification, path, title="vkplate state"):
    """Legacy ASCII structured grid; point ``x + mag * (u1, u2, v)``."""
    if not magnification > 0:
        raise ValueError(f"magnification must be > 0, got {magnification}")
    mesh = state.mesh
    u, v = state.u, state.v
    n = mesh.n_nodes
    pts = np.column_stack([mesh.node_coords + magnification * u, magnification * v[:, 0]])
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} 1",
        f"POINTS {n} double",
    ]
    lines += [" ".join(map(_num, p)) for p in pts]
    lines += [f"POINT_DATA {n}", "VECTORS u double"]
    lines += [f"{_num(a)} {_num(b)} 0" for a, b in u]
    lines += ["SCALARS v double 1", "LOOKUP_TABLE default"]
    lines += [_num(x) for x in v[:, 0]]
    lines += ["SCALARS grad_v double 2", "LOOKUP_TABLE default"]
    lines += [f"{_num(a)} {_num(b)}" for a, b in v[:, 1:3]]
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk(path):
    """Minimal reader for files from :func:`write_vtk`.

    Returns a dict with ``dimensions``, ``points`` and each point-data array.
    """
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines[0].startswith("# vtk DataFile Version"):
        raise ValueError("not a legacy VTK file")
    if lines[2].strip() != "ASCII" or lines[3].split() != ["DATASET", "STRUCTURED_GRID"]:
        raise ValueError("expected an ASCII STRUCTURED_GRID dataset")
    out = {}
    i = 4
    npts = 0
    while i < len(lines):
        tok = lines[i].split()
        if not tok:
            i += 1
            continue
        if tok[0] == "DIMENSIONS":
            out["dimensions"] = tuple(int(t) for t in tok[1:4])
            i += 1
        elif tok[0] == "POINTS":
            npts = int(tok[1])
            out["points"] = np.array([[float(t) for t in lines[i + 1 + k].split()]
                                      for k in range(npts)])
            i += 1 + npts
        elif tok[0] == "POINT_DATA":
            i += 1
        elif tok[0] == "VECTORS":
            out[tok[1]] = np.array([[float(t) for t in lines[i + 1 + k].split()]
                                    for k in range(npts)])
            i += 1 + npts
        elif tok[0] == "SCALARS":
            ncomp = int(tok[3]) if len(tok) > 3 else 1
            data = np.array([[float(t) for t in lines[i + 2 + k].split()] for k in range(npts)])
            out[tok[1]] = data[:, 0] if ncomp == 1 else data
            i += 2 + npts
        else:
            raise ValueError(f"unexpected line {lines[i]!r}")
    return out
