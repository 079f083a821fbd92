"""Command-line frontend.

Commands: ``quantize``, ``modes``, ``check``, ``simulate``, ``fixtures``.
Exit codes: 0 success, 1 invariant failure, 2 parse error, 3 topology
error, 4 numeric error.  Output is deterministic: identical input and
flags produce byte-identical output.

The ``NRCIRC_TOL_SCALE`` environment variable multiplies every
invariant tolerance (default 1.0), for loose/strict CI profiles.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .errors import (
    NetlistError,
    NumericError,
    SingularKineticError,
    TopologyError,
)
from .fixtures import FIXTURES, fixture
from .hamiltonian import (
    ChargeDualHamiltonian,
    QuadraticFluxHamiltonian,
    assemble_bkd,
    assemble_burkard,
    assemble_charge_dual,
    assemble_sdevice,
    hamiltonian_value,
)
from .immittance import scattering_has_admittance, immittance_convert
from .netlist import Netlist, NonreciprocalDevice, PhaseSlip, parse_netlist, render_netlist
from .oracle import (
    integrate_hamiltonian,
    kirchhoff_residual,
    linearized_frequencies,
)
from .symplectic import mode_report
from .units import PHI0_BAR

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_PARSE = 2
EXIT_TOPOLOGY = 3
EXIT_NUMERIC = 4


def _tol_scale() -> float:
    try:
        return float(os.environ.get("NRCIRC_TOL_SCALE", "1.0"))
    except ValueError:
        return 1.0


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> Netlist:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_netlist(fh.read())
    except OSError as err:
        _fail(EXIT_PARSE, f"cannot read {path}: {err}")
    except NetlistError as err:
        _fail(EXIT_PARSE, f"{path}: {err}")


def resolve_mode(netlist: Netlist, mode: str) -> str:
    """auto -> charge-dual for phase-slip circuits, sdevice when a device
    lacks an admittance description, bkd otherwise."""
    if mode != "auto":
        return mode
    if netlist.of_type(PhaseSlip):
        return "charge-dual"
    for dev in netlist.of_type(NonreciprocalDevice):
        s = immittance_convert(dev.description, "S").matrix
        if not scattering_has_admittance(s):
            return "sdevice"
    return "bkd"


def _assemble(netlist: Netlist, mode: str, alpha: float):
    if mode == "bkd":
        return assemble_bkd(netlist)
    if mode == "burkard":
        return assemble_burkard(netlist)
    if mode == "sdevice":
        return assemble_sdevice(netlist, alpha=alpha)
    if mode == "charge-dual":
        return assemble_charge_dual(netlist)
    raise click.UsageError(f"unknown mode {mode!r}")


def _guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SingularKineticError as err:
        _fail(EXIT_TOPOLOGY, str(err))
    except TopologyError as err:
        _fail(EXIT_TOPOLOGY, str(err))
    except NumericError as err:
        _fail(EXIT_NUMERIC, str(err))


def _matrix_lines(name: str, m: np.ndarray, scale: float = 1.0) -> list[str]:
    out = [f"{name}:"]
    for row in np.atleast_2d(m):
        out.append("  " + "  ".join(f"{v * scale: .12e}" for v in row))
    return out


def _unit_fields(units: str) -> dict:
    if units == "ghz":
        return {
            "system": "ghz",
            "kinetic": "fF",
            "inductive": "1/nH",
            "gyration": "1/ohm",
        }
    return {"system": "si", "kinetic": "F", "inductive": "1/H", "gyration": "1/ohm"}


def _quantize_payload(mode: str, h, units: str) -> dict:
    payload = {
        "schema_version": 1,
        "mode": mode,
        "units": _unit_fields(units),
        "hamiltonian": h.to_json_dict(),
        "frozen": None,
    }
    if isinstance(h, QuadraticFluxHamiltonian) and h.reduction is not None and h.reduction.frozen:
        payload["frozen"] = {
            "v_minus1": list(map(float, h.reduction.v_minus1)),
            "alpha_wb": float(h.alpha),
        }
    if units == "ghz" and isinstance(h, QuadraticFluxHamiltonian):
        ham = payload["hamiltonian"]
        ham["kinetic_f"] = (np.asarray(ham["kinetic_f"]) * 1e15).tolist()
        ham["inductive_inv_h"] = (np.asarray(ham["inductive_inv_h"]) * 1e-9).tolist()
    return payload


@click.group()
@click.version_option(version=__version__, prog_name="nrcirc")
def main():
    """Canonical Hamiltonians for nonreciprocal superconducting circuits."""


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--mode", default="auto", show_default=True,
              type=click.Choice(["auto", "bkd", "burkard", "sdevice", "charge-dual"]))
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
@click.option("--units", default="si", show_default=True, type=click.Choice(["si", "ghz"]))
@click.option("--alpha", default=0.0, show_default=True,
              help="Frozen flux offset in Wb (scattering route).")
def quantize(input_path, mode, fmt, units, alpha):
    """Emit the canonical Hamiltonian matrices for a netlist."""
    netlist = _load(input_path)
    mode = resolve_mode(netlist, mode)
    h = _guarded(_assemble, netlist, mode, alpha)

    if fmt == "json":
        click.echo(json.dumps(_quantize_payload(mode, h, units), sort_keys=True, indent=2))
        return

    kin_scale = 1e15 if units == "ghz" else 1.0
    ind_scale = 1e-9 if units == "ghz" else 1.0
    uf = _unit_fields(units)
    lines = [f"mode: {mode}", f"variables: {' '.join(h.labels)}"]
    if isinstance(h, ChargeDualHamiltonian):
        lines += _matrix_lines("inductive_inverse [1/H]", h.inductive_inverse)
        lines += _matrix_lines("z_gyration [ohm]", h.z_gyration)
    else:
        lines += _matrix_lines(f"kinetic [{uf['kinetic']}]", h.kinetic, kin_scale)
        lines += _matrix_lines(f"inductive [{uf['inductive']}]", h.inductive, ind_scale)
        lines += _matrix_lines("gyration [1/ohm]", h.gyration)
        if h.reduction is not None and h.reduction.frozen:
            v = " ".join(f"{x:.12f}" for x in h.reduction.v_minus1)
            lines.append(f"frozen direction: {v}")
            lines.append(f"alpha [Wb]: {h.alpha!r}")
    lines.append("potential:")
    for t in h.potential:
        row = " ".join(f"{v:.6e}" for v in t.row)
        lines.append(f"  {t.label}: E={t.energy:.12e} J  row=[{row}]  offset={t.offset:.6e} rad")
    click.echo("\n".join(lines))


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--mode", default="auto", show_default=True,
              type=click.Choice(["auto", "bkd", "burkard", "sdevice", "charge-dual"]))
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
@click.option("--check", is_flag=True, help="Compare against the companion-matrix oracle.")
@click.option("--dump-symplectic", is_flag=True)
@click.option("--alpha", default=0.0, show_default=True)
def modes(input_path, mode, fmt, check, dump_symplectic, alpha):
    """Normal-mode frequencies of the harmonic sector."""
    netlist = _load(input_path)
    mode = resolve_mode(netlist, mode)
    h = _guarded(_assemble, netlist, mode, alpha)
    if isinstance(h, ChargeDualHamiltonian):
        h = h.as_flux_form()

    report = _guarded(mode_report, h)
    freqs_hz = report.frequencies / (2 * np.pi)

    mismatch = 0.0
    oracle_hz = None
    if check:
        oracle = _guarded(linearized_frequencies, h)
        oracle_hz = oracle / (2 * np.pi)
        if len(oracle) == len(report.frequencies):
            scale = np.maximum(np.abs(oracle), 1e-300)
            diffs = np.abs(report.frequencies - oracle) / scale
            mismatch = float(diffs.max()) if diffs.size else 0.0
        else:
            mismatch = float("inf")

    if fmt == "json":
        payload = {
            "frequencies_hz": [float(f) for f in freqs_hz],
            "frequencies_rad_s": [float(f) for f in report.frequencies],
            "free_modes": report.free_modes,
        }
        if check:
            payload["oracle_hz"] = [float(f) for f in oracle_hz]
            payload["max_relative_mismatch"] = mismatch
        if dump_symplectic and report.modes is not None:
            payload["s_symp"] = report.modes.s_symp.tolist()
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
    else:
        lines = [f"free modes: {report.free_modes}"]
        for i, f in enumerate(freqs_hz):
            row = f"mode {i + 1}: {f:.9e} Hz"
            if check:
                row += f"  oracle {oracle_hz[i]:.9e} Hz" if i < len(oracle_hz) else "  oracle -"
            lines.append(row)
        if check:
            lines.append(f"max relative mismatch: {mismatch:.3e}")
        if dump_symplectic and report.modes is not None:
            lines += _matrix_lines("s_symp", report.modes.s_symp)
        click.echo("\n".join(lines))

    if check and mismatch > 1e-8 * _tol_scale():
        sys.exit(EXIT_INVARIANT)


def _invariant_rows(netlist: Netlist, mode: str, alpha: float, dt, steps) -> list[tuple]:
    scale = _tol_scale()
    rows = []
    h = _assemble(netlist, mode, alpha)
    flux_form = h.as_flux_form() if isinstance(h, ChargeDualHamiltonian) else h

    g = flux_form.gyration
    asym = np.abs(g + g.T).max() / max(1.0, np.abs(g).max())
    rows.append(("gyration skew-symmetric", asym, 1e-10 * scale))

    kin_min = float(np.linalg.eigvalsh(flux_form.kinetic).min())
    rows.append(("kinetic positive definite", 0.0 if kin_min > 0 else 1.0, 0.5))

    report = mode_report(flux_form)
    oracle = linearized_frequencies(flux_form)
    if len(oracle) == len(report.frequencies):
        rel = (
            np.abs(report.frequencies - oracle) / np.maximum(np.abs(oracle), 1e-300)
        ).max() if oracle.size else 0.0
    else:
        rel = float("inf")
    rows.append(("mode frequencies match oracle", float(rel), 1e-8 * scale))

    n = flux_form.n_vars
    rng = np.random.default_rng(7)
    x0 = PHI0_BAR * 0.05 * rng.standard_normal(n)
    p0 = np.zeros(n)
    freqs = oracle if oracle.size else np.array([1.0 / np.sqrt(
        np.abs(np.diag(flux_form.kinetic)).max())])
    step = dt if dt else (2 * np.pi / freqs.max()) / 400.0
    nS = steps or 2000
    traj = integrate_hamiltonian(flux_form, x0, p0, step, nS)
    rows.append(("energy conservation", traj.energy_drift(), 1e-8 * scale))

    if mode == "bkd":
        resid = kirchhoff_residual(netlist, traj)
        rows.append(("current law residual", resid.kcl_relative, 1e-5 * scale))
        rows.append(("voltage law residual", resid.kvl_relative, 1e-5 * scale))

    if mode == "sdevice" and flux_form.reduction is not None and flux_form.reduction.frozen:
        from .oracle import integrate_full_sdevice

        rec = flux_form.reduction
        nports = rec.s.shape[0]
        phi0 = PHI0_BAR * 0.05 * rng.standard_normal(nports)
        v0 = rng.standard_normal(nports)
        v0 -= rec.v_minus1 * (rec.v_minus1 @ v0)
        v0 *= PHI0_BAR * freqs.max() * 0.05
        full = integrate_full_sdevice(netlist, phi0, v0, step, nS)
        rows.append(("frozen constraint", float(full.constraint_residuals.max()), 1e-8 * scale))
    return rows


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--mode", default="auto", show_default=True,
              type=click.Choice(["auto", "bkd", "burkard", "sdevice", "charge-dual"]))
@click.option("--alpha", default=0.0, show_default=True)
@click.option("--dt", default=0.0, show_default=True, help="Override integrator step (s).")
@click.option("--steps", default=0, show_default=True, help="Override integrator steps.")
def check(input_path, mode, alpha, dt, steps):
    """Run the invariant suite and print a pass/fail table."""
    netlist = _load(input_path)
    mode = resolve_mode(netlist, mode)
    rows = _guarded(_invariant_rows, netlist, mode, alpha, dt or None, steps or None)
    failed = 0
    for name, value, tol in rows:
        ok = value <= tol
        failed += 0 if ok else 1
        status = "pass" if ok else "FAIL"
        click.echo(f"{status}  {name:<32} {value:.3e} (tol {tol:.1e})")
    if failed:
        _fail(EXIT_INVARIANT, f"{failed} invariant(s) failed")


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--mode", default="auto", show_default=True,
              type=click.Choice(["auto", "bkd", "burkard", "sdevice", "charge-dual"]))
@click.option("--alpha", default=0.0, show_default=True)
@click.option("--dt", required=True, type=float, help="Time step in seconds.")
@click.option("--steps", required=True, type=int)
@click.option("--x0", default="", help="Comma-separated initial coordinates.")
@click.option("--p0", default="", help="Comma-separated initial momenta.")
@click.option("-o", "--output", type=click.Path(), default="-")
def simulate(input_path, mode, alpha, dt, steps, x0, p0, output):
    """Integrate the assembled Hamiltonian; write a CSV trajectory."""
    netlist = _load(input_path)
    mode = resolve_mode(netlist, mode)
    h = _guarded(_assemble, netlist, mode, alpha)
    if isinstance(h, ChargeDualHamiltonian):
        h = h.as_flux_form()
    n = h.n_vars

    def parse_vec(text, fallback):
        if not text:
            return fallback
        vals = np.array([float(v) for v in text.split(",")])
        if vals.shape != (n,):
            _fail(EXIT_PARSE, f"state needs {n} entries")
        return vals

    x = parse_vec(x0, PHI0_BAR * 0.1 * np.ones(n))
    p = parse_vec(p0, np.zeros(n))
    traj = _guarded(integrate_hamiltonian, h, x, p, dt, steps)
    csv = traj.to_csv()
    if output == "-":
        click.echo(csv, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(csv)
        click.echo(f"wrote {output}")


@main.command(name="fixtures")
@click.option("--list", "list_only", is_flag=True, help="List available circuits.")
@click.option("--emit", metavar="NAME", help="Print one circuit's netlist.")
@click.option("-o", "--output-dir", type=click.Path(), help="Write all circuits as .nrq files.")
def fixtures_cmd(list_only, emit, output_dir):
    """List or emit the bundled reference circuits."""
    if list_only or (not emit and not output_dir):
        for name in sorted(FIXTURES):
            click.echo(name)
        return
    if emit:
        try:
            click.echo(render_netlist(fixture(emit)), nl=False)
        except NetlistError as err:
            _fail(EXIT_PARSE, str(err))
        return
    os.makedirs(output_dir, exist_ok=True)
    for name in sorted(FIXTURES):
        path = os.path.join(output_dir, f"{name}.nrq")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_netlist(fixture(name)))
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
