"""Command-line experiment drivers.

Every subcommand accepts ``--spec FILE`` with a JSON object of parameters;
explicit flags override values from the file.  Exit status is 0 on success,
1 for invalid input or domain errors, and 2 for numerical failures.  In the
failure cases a JSON error record is written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import curves, diagnostics, fem, stability, variational
from .curves import RombergError
from .elliptic import EllipticDomainError

log = logging.getLogger("elasticflow")

INITIAL_CHOICES = ("critical", "elastica", "elastica-period", "lemniscate", "figure8", "line")

DEFAULTS = {
    "qfun": {"kmin": -0.999, "kmax": 0.999, "n": 2001},
    "remark4": {"k": 0.71},
    "consistency": {"J": [1024, 4096, 16384, 65536], "which": "both"},
    "flow": {
        "initial": "critical",
        "a": None,
        "k": 0.71,
        "m": 1,
        "J": 4096,
        "dt": 1e-4,
        "adaptive": False,
        "dt_growth_cap": 1.05,
        "t_end": 1.0,
        "out": "runs",
        "run": None,
        "snapshots": None,
        "y0": "interpolate",
        "record_every": 1,
    },
    "bisect": {"J": 1024, "dt": None, "alo": 1.40, "ahi": 1.50, "res": 1e-4, "tmax": 100.0, "k": 0.71},
    "stability": {},
    "compare": {"snapshot": None, "ref": "lemniscate", "J": 1024},
}

# value types used to validate spec files
SCHEMA = {
    "qfun": {"kmin": float, "kmax": float, "n": int},
    "remark4": {"k": float},
    "consistency": {"J": list, "which": str},
    "flow": {
        "initial": str,
        "a": (float, type(None)),
        "k": float,
        "m": int,
        "J": int,
        "dt": float,
        "adaptive": bool,
        "dt_growth_cap": float,
        "t_end": float,
        "out": str,
        "run": (str, type(None)),
        "snapshots": (list, type(None)),
        "y0": str,
        "record_every": int,
    },
    "bisect": {
        "J": int,
        "dt": (float, type(None)),
        "alo": float,
        "ahi": float,
        "res": float,
        "tmax": float,
        "k": float,
    },
    "stability": {},
    "compare": {"snapshot": str, "ref": str, "J": int},
}


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    command: str
    parameters: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentSpec":
        if self.command not in SCHEMA:
            raise SpecError(f"unknown command {self.command!r}")
        schema = SCHEMA[self.command]
        for key, val in self.parameters.items():
            if key not in schema:
                raise SpecError(f"{self.command}: unknown parameter {key!r}")
            want = schema[key]
            if want is float and isinstance(val, int) and not isinstance(val, bool):
                self.parameters[key] = val = float(val)
            if isinstance(want, tuple) and float in want and isinstance(val, int) and not isinstance(val, bool):
                self.parameters[key] = val = float(val)
            if not isinstance(val, want):
                raise SpecError(f"{self.command}: parameter {key!r} has wrong type {type(val).__name__}")
        check = _CHECKS.get(self.command)
        if check is not None:
            check({**DEFAULTS[self.command], **self.parameters})
        return self


def _check_qfun(p):
    if not (-1.0 < p["kmin"] < p["kmax"] < 1.0):
        raise SpecError("need -1 < kmin < kmax < 1")
    if p["n"] < 2:
        raise SpecError("n must be >= 2")


def _check_consistency(p):
    if not p["J"] or any((not isinstance(j, int)) or j < 8 or j % 2 for j in p["J"]):
        raise SpecError("J list must contain even integers >= 8")
    if p["which"] not in ("critical", "elastica", "both"):
        raise SpecError("which must be critical, elastica or both")


def _check_flow(p):
    if p["initial"] not in INITIAL_CHOICES:
        raise SpecError(f"initial must be one of {INITIAL_CHOICES}")
    if p["J"] < 8:
        raise SpecError("J must be >= 8")
    if not p["dt"] > 0 or not p["t_end"] > 0:
        raise SpecError("dt and t_end must be positive")
    if p["y0"] not in ("interpolate", "project"):
        raise SpecError("y0 must be interpolate or project")
    if p["a"] is not None and not p["a"] > 0:
        raise SpecError("a must be positive")


def _check_bisect(p):
    if not p["alo"] < p["ahi"]:
        raise SpecError(f"inverted bracket: alo={p['alo']} >= ahi={p['ahi']}")
    if not p["res"] > 0 or not p["tmax"] > 0:
        raise SpecError("res and tmax must be positive")


def _check_compare(p):
    if not p.get("snapshot"):
        raise SpecError("compare needs --snapshot")


_CHECKS = {
    "qfun": _check_qfun,
    "consistency": _check_consistency,
    "flow": _check_flow,
    "bisect": _check_bisect,
    "compare": _check_compare,
}


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.12g}"
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_qfun(p, out):
    ks = np.linspace(p["kmin"], p["kmax"], p["n"])
    rows = []
    for k in ks:
        q = variational.q_value(float(k))
        qt = variational.q_tilde(float(k)) if variational.SQRT_HALF < k < 1.0 else float("nan")
        rows.append((float(k), q, qt))
    out.write(_csv(rows, ("k", "Q", "Qtilde")))


def cmd_remark4(p, out):
    rep = variational.remark4_report(p["k"])
    rows = [
        ("k", rep.k),
        ("a_star", rep.a_star),
        ("int_u2", rep.int_u2),
        ("int_u4", rep.int_u4),
        ("int_du2", rep.int_du2),
        ("int_residual2", rep.int_residual2),
        ("lhs", rep.lhs),
    ]
    out.write(_csv(rows, ("quantity", "value")))


def consistency_rows(J_list, which="both"):
    a = variational.critical_amplitude(0.71)
    rows = []
    for J in J_list:
        if which in ("critical", "both"):
            e = diagnostics.discrete_energy(curves.gen_critical(a, 0.71, J))
            rows.append(("critical", J, e.Ehat - 2.0 * math.pi))
        if which in ("elastica", "both"):
            e = diagnostics.discrete_energy(curves.gen_rect_elastica(1, J))
            rows.append(("elastica", J, e.Ehat - 2.0 * math.pi))
    return rows


def cmd_consistency(p, out):
    rows = consistency_rows(p["J"], p["which"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("initial", "J", "Ehat0_minus_2pi"))
    for name, J, d in rows:
        w.writerow((name, J, f"{d:.5e}"))
    out.write(buf.getvalue())


def initial_curve(p) -> curves.DiscreteCurve:
    name, J = p["initial"], p["J"]
    if name == "critical":
        a = p["a"] if p["a"] is not None else variational.critical_amplitude(p["k"])
        c = curves.gen_critical(a, p["k"], J)
    elif name == "elastica":
        c = curves.gen_rect_elastica(p["m"], J, b=1.0)
    elif name == "elastica-period":
        c = curves.gen_elastica_period(J)
    elif name == "lemniscate":
        c = curves.gen_lemniscate(J)
    elif name == "figure8":
        c = curves.gen_figure_eight(J)
    else:
        c = curves.gen_line(J)
    if p["y0"] == "project" or c.y is None:
        c = fem.solve_y0(c)
    return c


def _time_tag(t: float) -> str:
    return f"{t:g}"


def cmd_flow(p, out):
    curve = initial_curve(p)
    snaps = p["snapshots"]
    if snaps is None:
        if p["adaptive"]:
            snaps = [0.0] + [10.0**e for e in range(0, 13) if 10.0**e <= p["t_end"]]
        else:
            snaps = [0.0, p["t_end"]]
    cfg = fem.FlowConfig(
        J=p["J"],
        dt0=p["dt"],
        t_end=p["t_end"],
        adaptive=p["adaptive"],
        dt_growth_cap=p["dt_growth_cap"],
        snapshot_times=snaps,
        record_every=p["record_every"],
    )
    res = fem.run_flow(cfg, curve)
    outdir = Path(p["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    run = p["run"] or p["initial"]
    trace_path = outdir / f"{run}_trace.csv"
    res.trace.to_csv(trace_path)
    written = [str(trace_path)]
    for ts, st in sorted(res.snapshots.items()):
        path = outdir / f"{run}_t{_time_tag(ts)}.dat"
        curves.write_snapshot(path, st.curve, t=st.t, step=st.m)
        written.append(str(path))
    out.write(json.dumps({"status": "ok", "steps": res.final.m, "t": res.final.t, "files": written}) + "\n")


def cmd_bisect(p, out):
    probes_out = []

    def cb(probe):
        log.info("a=%.6f fate=%s", probe.a, probe.fate.value)
        probes_out.append(probe)

    res = fem.bisect_critical_amplitude(
        J=p["J"],
        dt=p["dt"],
        a_lo=p["alo"],
        a_hi=p["ahi"],
        t_max=p["tmax"],
        resolution=p["res"],
        k=p["k"],
        callback=cb,
    )
    rows = [("probe", pr.a, pr.ehat0_ratio, pr.fate.value, pr.t_final) for pr in res.probes]
    ratio = {pr.a: pr.ehat0_ratio for pr in res.probes}
    rows.append(("lower", res.a_lo, ratio.get(res.a_lo, float("nan")), "Line", float("nan")))
    rows.append(("upper", res.a_hi, ratio.get(res.a_hi, float("nan")), "Grows", float("nan")))
    out.write(_csv(rows, ("kind", "a", "Ehat0_over_2pi", "fate", "t_final")))


def cmd_stability(p, out):
    rows = [(f"cos{j}", stability.quad_form_B(stability.cosine_mode(j))) for j in range(3)]
    rows.append(("constant_closed_form", stability.constant_mode_value()))
    ray = stability.rayleigh_minimum([stability.cosine_mode(j) for j in range(3)])
    rows.append(("rayleigh_min_3modes", ray.min_eigenvalue))
    out.write(_csv(rows, ("mode", "value")))


def reference_curve(name: str, J: int) -> curves.DiscreteCurve:
    if name == "lemniscate":
        return curves.gen_lemniscate(J)
    path = Path(name)
    if path.exists():
        return curves.read_snapshot(path)
    raise SpecError(f"unknown reference {name!r}")


def cmd_compare(p, out):
    snap = Path(p["snapshot"])
    if not snap.exists():
        raise SpecError(f"snapshot {snap} does not exist")
    a = curves.read_snapshot(snap)
    b = reference_curve(p["ref"], p["J"])
    d = diagnostics.shape_distance(a, b)
    out.write(_csv([(str(snap), p["ref"], d)], ("snapshot", "reference", "distance")))


COMMANDS = {
    "qfun": cmd_qfun,
    "remark4": cmd_remark4,
    "consistency": cmd_consistency,
    "flow": cmd_flow,
    "bisect": cmd_bisect,
    "stability": cmd_stability,
    "compare": cmd_compare,
}


def _int_list(text: str):
    return [int(v) for v in text.replace(",", " ").split()]


def _float_list(text: str):
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elasticflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def cmd(name, help_):
        sp = sub.add_parser(name, help=help_, argument_default=S)
        sp.add_argument("--spec", help="JSON file with parameters; flags override it")
        return sp

    sp = cmd("qfun", "tabulate Q(k) and the modified quotient")
    sp.add_argument("--kmin", type=float)
    sp.add_argument("--kmax", type=float)
    sp.add_argument("--n", type=int)

    sp = cmd("remark4", "integrals of the critical profile")
    sp.add_argument("--k", type=float)

    sp = cmd("consistency", "initial discrete energy error for both exact curves")
    sp.add_argument("--J", type=_int_list, help="comma separated list")
    sp.add_argument("--which", choices=("critical", "elastica", "both"))

    sp = cmd("flow", "run the flow and write trace and snapshots")
    sp.add_argument("--initial", choices=INITIAL_CHOICES)
    sp.add_argument("--a", type=float)
    sp.add_argument("--k", type=float)
    sp.add_argument("--m", type=int)
    sp.add_argument("--J", type=int)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--adaptive", action="store_true")
    sp.add_argument("--dt-growth-cap", dest="dt_growth_cap", type=float)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--out")
    sp.add_argument("--run", help="file name prefix (default: initial data name)")
    sp.add_argument("--snapshots", type=_float_list, help="comma separated times")
    sp.add_argument("--y0", choices=("interpolate", "project"))
    sp.add_argument("--record-every", dest="record_every", type=int)

    sp = cmd("bisect", "bracket the critical amplitude")
    sp.add_argument("--J", type=int)
    sp.add_argument("--dt", type=float, help="default 0.2048 h")
    sp.add_argument("--alo", type=float)
    sp.add_argument("--ahi", type=float)
    sp.add_argument("--res", type=float)
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--k", type=float)

    cmd("stability", "quadratic form of the linearisation on cosine modes")

    sp = cmd("compare", "shape distance between a snapshot and a reference")
    sp.add_argument("--snapshot")
    sp.add_argument("--ref")
    sp.add_argument("--J", type=int, help="resolution of a generated reference")
    return ap


def spec_from_args(ns: argparse.Namespace) -> ExperimentSpec:
    params = dict(DEFAULTS[ns.command])
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "spec", "verbose")}
    spec_file = getattr(ns, "spec", None)
    if spec_file:
        data = json.loads(Path(spec_file).read_text())
        if not isinstance(data, dict):
            raise SpecError("spec file must contain a JSON object")
        data.pop("command", None)
        params.update(data)
    params.update(flags)
    return ExperimentSpec(ns.command, params).validate()


def _error(kind: str, exc: BaseException, code: int) -> int:
    rec = {"status": "error", "kind": kind, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("m", "t"):
        if hasattr(exc, attr):
            rec["step" if attr == "m" else "t"] = getattr(exc, attr)
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


def main(argv=None, out=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    out = out or sys.stdout
    try:
        spec = spec_from_args(ns)
        COMMANDS[spec.command](spec.parameters, out)
    except (fem.FlowError, RombergError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _error("numerical", exc, 2)
    except (SpecError, EllipticDomainError, fem.InconsistentBracketError, ValueError, OSError) as exc:
        return _error("domain", exc, 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
