"""Command-line entry point ``qperceptron``.

Every data command writes one table, as CSV (a ``# config:`` comment line
with the resolved configuration, then a header row) or as an SVG line plot
of the same data. Exit codes: 0 success, 1 invalid input, 2 I/O error,
3 numerical failure. Errors are reported on stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis, circuits, units
from .config import ConfigFileError, RunConfig, grid_of, load, parse_bits
from .device import PerturbationError, coupler_sweep
from .dynamics import PerceptronConfig
from .numerics import NumericsError

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Table:
    header: list[str]
    rows: list[list]
    xlabel: str = ""
    ylabel: str = ""
    # (label, x column, y column, optional (column, value) row filter)
    plot: list[tuple] = field(default_factory=list)
    # columns used only to group plot series, left out of the CSV
    hidden: tuple[str, ...] = ()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.12g}"
    return str(v)


def _bits(x) -> str:
    return "".join(str(b) for b in x) or "-"


def render_csv(table: Table, stamp: dict) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(stamp, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_svg(table: Table, title: str) -> str:
    from .svg import line_plot

    col = {name: k for k, name in enumerate(table.header)}
    series = []
    for label, xc, yc, filt in table.plot:
        rows = [r for r in table.rows if filt is None or r[col[filt[0]]] == filt[1]]
        x = [float("nan") if r[col[xc]] is None else float(r[col[xc]]) for r in rows]
        y = [float("nan") if r[col[yc]] is None else float(r[col[yc]]) for r in rows]
        series.append((label, x, y))
    return line_plot(series, table.xlabel, table.ylabel, title)


# --- commands ----------------------------------------------------------------

def cmd_zz_sweep(rc: RunConfig) -> Table:
    g = grid_of(rc.raw["zz_sweep"], "ghz")
    rows = []
    for r in coupler_sweep(rc.device, g.values(units.GHZ)):
        rows.append([units.to_ghz(r.omega_c),
                     None if r.j_numeric is None else units.to_mhz(r.j_numeric),
                     None if r.j_perturbative is None else units.to_mhz(r.j_perturbative),
                     int(r.dispersive), r.reason])
    return Table(["omega_c_GHz", "J_numeric_MHz", "J_perturbative_MHz", "dispersive", "reason"],
                 rows, "coupler frequency (GHz)", "J/2pi (MHz)",
                 [("numeric", "omega_c_GHz", "J_numeric_MHz", None),
                  ("perturbative", "omega_c_GHz", "J_perturbative_MHz", None)])


def _input_strings(rc: RunConfig, values) -> list[tuple[int, ...]]:
    out = [parse_bits(v) for v in values]
    n = rc.perceptron.n_inputs
    for x in out:
        if len(x) != n:
            raise ConfigFileError(f"input string {_bits(x)!r} does not match {n} weight(s)")
    return out


def cmd_activation(rc: RunConfig) -> Table:
    a = rc.raw["activation"]
    durations = [float(t) for t in a["T_us"]]
    if not durations:
        raise ConfigFileError("[activation] T_us list is empty")
    inputs = _input_strings(rc, a["inputs"])
    if not inputs:
        raise ConfigFileError("[activation] inputs list is empty")
    bias = grid_of(a, "mhz").values(units.MHZ)
    rows, plot = [], []
    for T in durations:
        cfg = replace(rc.perceptron, pulse=rc.pulse_with_duration(T))
        for x in inputs:
            c = analysis.activation_sweep(cfg, bias, x)
            tag = f"{_fmt(T)}|{_bits(x)}"
            rows += [[units.to_mhz(b), p, _bits(x), T, tag] for b, p in zip(bias, c.populations)]
            plot.append((f"T={T:g} us, x={_bits(x)}", "bias_MHz", "population", ("curve", tag)))
    return Table(["bias_MHz", "population", "input_string", "T_us", "curve"], rows,
                 "bias b/2pi (MHz)", "excited population", plot, hidden=("curve",))


def cmd_weight_sweep(rc: RunConfig) -> Table:
    ws = rc.raw["weight_sweep"]
    weights = grid_of(ws, "mhz").values(units.MHZ)
    biases = [float(b) for b in ws["biases_mhz"]]
    if not biases:
        raise ConfigFileError("[weight_sweep] biases_mhz list is empty")
    rows, plot = [], []
    for b in biases:
        cfg = PerceptronConfig((0.0,), b * units.MHZ, rc.perceptron.pulse, rc.perceptron.omega_q)
        p0, p1, _ = analysis.weight_sweep(cfg, weights)
        rows += [[units.to_mhz(w), a, c, b] for w, a, c in zip(weights, p0, p1)]
        plot += [(f"x=0, b={b:g} MHz", "weight_MHz", "population_input0", ("bias_MHz", b)),
                 (f"x=1, b={b:g} MHz", "weight_MHz", "population_input1", ("bias_MHz", b))]
    return Table(["weight_MHz", "population_input0", "population_input1", "bias_MHz"], rows,
                 "weight w/2pi (MHz)", "excited population", plot)


def cmd_negativity(rc: RunConfig) -> Table:
    if rc.perceptron.n_inputs != 1:
        raise ConfigFileError("negativity needs exactly one entry in [perceptron] weights_mhz")
    ng = rc.raw["negativity"]
    bias = grid_of(ng, "mhz").values(units.MHZ)
    t1_us = float(ng.get("t1_us", 0.0))
    t1 = t1_us * units.US if t1_us > 0 else None
    uni, lossy = analysis.negativity_sweep(rc.perceptron, bias, t1_times=t1)
    header = ["bias_MHz", "negativity_unitary"]
    plot = [("unitary", "bias_MHz", "negativity_unitary", None)]
    if lossy is None:
        rows = [[units.to_mhz(b), u] for b, u in zip(bias, uni)]
    else:
        header.append("negativity_T1")
        plot.append((f"T1 = {t1_us:g} us", "bias_MHz", "negativity_T1", None))
        rows = [[units.to_mhz(b), u, v] for b, u, v in zip(bias, uni, lossy)]
    return Table(header, rows, "bias b/2pi (MHz)", "negativity", plot)


def cmd_fit(rc: RunConfig) -> tuple[Table, str]:
    f = rc.raw["fit"]
    T = float(f["T_us"])
    (x,) = _input_strings(rc, [f["input"]])
    cfg = replace(rc.perceptron, pulse=rc.pulse_with_duration(T))
    curve = analysis.activation_sweep(cfg, grid_of(f, "mhz").values(units.MHZ), x)
    res = analysis.fit_activation(curve)
    model = analysis.fitted_curve(curve, res)
    rows = [[units.to_mhz(b), p, m, _bits(x), T]
            for b, p, m in zip(curve.bias_points, curve.populations, model)]
    report = (f"T_fit_us={res.t_fit / units.US:.9g}\n"
              f"delta_MHz={units.to_mhz(res.delta_offset):.9g}\n"
              f"residual_rms={res.residual_rms:.6g}\n")
    table = Table(["bias_MHz", "population", "fitted", "input_string", "T_us"], rows,
                  "bias b/2pi (MHz)", "excited population",
                  [("simulation", "bias_MHz", "population", None),
                   ("analytic fit", "bias_MHz", "fitted", None)])
    return table, report


def cmd_decompose(rc: RunConfig, out: Path) -> str:
    d = rc.raw["decompose"]
    f2q, t2q = float(d["f_2q"]), float(d["t_2q_ns"]) * units.NS
    lines = ["N,Ng,t_us,F"]
    for n in range(1, 5):
        e = circuits.estimate(n, f2q, t2q)
        lines.append(f"{n},{e.n_cnots},{e.total_time / units.US:.4g},{e.fidelity_estimate:.4g}")
    thetas = {parse_bits(k): float(v) for k, v in d["thetas"].items()}
    if not thetas:
        raise ConfigFileError("[decompose] thetas table is empty")
    n = {len(k) for k in thetas}
    if len(n) != 1 or 0 in n:
        raise ConfigFileError("[decompose] thetas keys must be bitstrings of one common length >= 1")
    (n,) = n
    stamp = "config: " + json.dumps({"decompose": d}, sort_keys=True)
    if n >= 3:
        note = f"synthesis not implemented for N >= 3 (N = {n}); counts only"
        out.write_text(f"# {stamp}\n# {note}\n")
        return "\n".join(lines + [note]) + "\n"
    c = circuits.decompose_perceptron(thetas, n)
    circuits.write_circuit(c, out, header=stamp)
    back = circuits.read_circuit(out)
    fid = circuits.equivalence_fidelity(circuits.circuit_unitary(back),
                                        circuits.target_unitary(thetas, n))
    lines.append(f"circuit: N={n} cnots={back.n_cnots} single={back.n_single} "
                 f"verified_fidelity={fid:.15f}")
    if fid < 1 - 1e-9:
        raise NumericsError(f"emitted circuit fails verification (fidelity {fid!r})")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "zz-sweep": (cmd_zz_sweep, "ZZ coupling versus coupler frequency"),
    "activation": (cmd_activation, "activation curves for several pulse lengths and inputs"),
    "weight-sweep": (cmd_weight_sweep, "output population versus weight at fixed biases"),
    "negativity": (cmd_negativity, "negativity after a superposition input versus bias"),
    "fit": (cmd_fit, "fit the analytic transfer formula to a simulated activation curve"),
    "decompose": (cmd_decompose, "gate-model circuit and cost table"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="TOML configuration file (defaults used for missing keys)")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS,
                        help="output path (default: <command>.<format>)")
    common.add_argument("--format", choices=("csv", "svg"), default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="qperceptron", parents=[common],
                                     description="Adiabatic quantum perceptron gate simulations.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "exit_code": code, "message": message}) + "\n")
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = getattr(args, "config", None)
    fmt = getattr(args, "format", "csv")
    out = getattr(args, "out", None)
    name = args.command
    if out is None:
        out = Path(f"{name}.{'txt' if name == 'decompose' else fmt}")
    try:
        rc = load(config)
        if name == "decompose":
            if fmt != "csv":
                raise ConfigFileError("decompose writes a circuit text file; --format svg is not supported")
            sys.stdout.write(cmd_decompose(rc, out))
            return EXIT_OK
        result = COMMANDS[name][0](rc)
        table, report = result if isinstance(result, tuple) else (result, "")
        if fmt == "svg":
            text = render_svg(table, name)
        else:
            keep = [k for k, h in enumerate(table.header) if h not in table.hidden]
            view = Table([table.header[k] for k in keep], [[r[k] for k in keep] for r in table.rows])
            text = render_csv(view, {"command": name, **rc.raw})
        out.write_text(text)
        sys.stdout.write(report)
        return EXIT_OK
    except OSError as exc:
        return _fail(EXIT_IO, "io", f"{exc.strerror or exc}: {exc.filename or out}")
    except (NumericsError, analysis.FitError, PerturbationError) as exc:
        return _fail(EXIT_NUMERIC, "numerical", str(exc))
    except analysis.AnalysisError as exc:
        if "out of range" in str(exc):
            return _fail(EXIT_NUMERIC, "numerical", str(exc))
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except (ValueError, TypeError, KeyError) as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
