"""Independent time-domain and spectral verification.

Nothing here reuses the normal-form machinery: trajectories come from
implicit-midpoint integration of Hamilton's equations (or of the raw
constrained device equation), and frequencies from a dense eigensolve
of the first-order companion matrix.  Agreement between these results
and the assembled Hamiltonians / symplectic spectra is the evidence
that the assembly is right.

Integration is performed in nondimensional variables (fluxes in units
of Phi0/2pi, a characteristic frequency scaling time) so Newton
convergence tests are meaningful despite SI magnitudes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstraintViolationError,
    DimensionMismatchError,
    NonConvergenceError,
    TopologyUnsupportedError,
)
from .graph import build_graph, loop_matrix, select_tree
from .hamiltonian import QuadraticFluxHamiltonian, _cap_value, hamiltonian_value
from .immittance import immittance_convert
from .netlist import (
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
)
from .reducer import combined_turns_matrix
from .units import PHI0_BAR

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50

#: scaled |v_-1 . dPhi/dt| above which the frozen constraint counts as broken
CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    coordinates: np.ndarray  # (steps+1, n)
    momenta: np.ndarray  # conjugate momenta, or velocities for the raw system
    energies: np.ndarray
    constraint_residuals: np.ndarray  # scaled frozen-velocity residual per step

    @property
    def n_vars(self) -> int:
        return self.coordinates.shape[1]

    def energy_drift(self) -> float:
        e0 = self.energies[0]
        scale = max(abs(e0), np.abs(self.energies).max(), 1e-300)
        return float(np.abs(self.energies - e0).max() / scale)

    def to_csv(self) -> str:
        buf = io.StringIO()
        n = self.n_vars
        header = (
            ["time_s"]
            + [f"x{i}" for i in range(n)]
            + [f"p{i}" for i in range(n)]
            + ["energy_j", "constraint_residual"]
        )
        buf.write(",".join(header) + "\n")
        for k in range(len(self.times)):
            row = (
                [self.times[k]]
                + list(self.coordinates[k])
                + list(self.momenta[k])
                + [self.energies[k], self.constraint_residuals[k]]
            )
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def _frequency_scale(h: QuadraticFluxHamiltonian) -> float:
    c_norm = np.linalg.norm(h.kinetic, 2)
    k_norm = np.linalg.norm(h.harmonic_inductive(), 2)
    g_norm = np.linalg.norm(h.gyration, 2)
    omega = 0.0
    if k_norm > 0:
        omega = max(omega, np.sqrt(k_norm / c_norm))
    if g_norm > 0:
        omega = max(omega, g_norm / c_norm)
    return omega if omega > 0 else 1.0


def _coordinate_scale(h: QuadraticFluxHamiltonian) -> float:
    """Natural coordinate magnitude: one radian of junction phase."""
    row_scale = max(
        (np.abs(t.row).max() for t in h.potential if t.row.size), default=0.0
    )
    return 1.0 / row_scale if row_scale > 0 else PHI0_BAR


def _implicit_midpoint(z0, deriv, jac, dt, steps, record):
    """Generic implicit-midpoint loop in already-scaled variables."""
    dim = z0.shape[0]
    z = z0.copy()
    record(0, z)
    eye = np.eye(dim)
    for k in range(steps):
        z_new = z + dt * deriv(z)  # explicit Euler predictor
        converged = False
        for _ in range(NEWTON_MAX_ITER):
            mid = 0.5 * (z + z_new)
            res = z_new - z - dt * deriv(mid)
            if np.linalg.norm(res, np.inf) < NEWTON_TOL * max(
                1.0, np.linalg.norm(z_new, np.inf)
            ):
                converged = True
                break
            jmat = eye - 0.5 * dt * jac(mid)
            z_new = z_new - np.linalg.solve(jmat, res)
        if not converged:
            raise NonConvergenceError(
                f"implicit midpoint failed to converge at step {k}"
            )
        z = z_new
        record(k + 1, z)
    return z


def integrate_hamiltonian(
    h: QuadraticFluxHamiltonian,
    x0: np.ndarray,
    p0: np.ndarray,
    dt: float,
    steps: int,
) -> Trajectory:
    """Implicit-midpoint trajectory of Hamilton's equations for ``h``.

    The scheme is symplectic, so quadratic invariants are conserved to
    solver tolerance and the energy error stays bounded.
    """
    x0 = np.asarray(x0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    n = h.n_vars
    if x0.shape != (n,) or p0.shape != (n,) or dt <= 0:
        raise DimensionMismatchError("bad initial state or step size")

    omega = _frequency_scale(h)
    xs = _coordinate_scale(h)
    ps = max(np.abs(np.diag(h.kinetic)).max(), 1e-300) * xs * omega
    tau = dt * omega

    c_inv = np.linalg.inv(h.kinetic)
    g = h.gyration
    m0 = h.inductive

    def deriv(z):
        x = z[:n] * xs
        p = z[n:] * ps
        u = c_inv @ (p - 0.5 * g @ x)
        dx = u
        dp = -(0.5 * g @ u + m0 @ x + h.potential_gradient(x))
        return np.concatenate([dx / (xs * omega), dp / (ps * omega)])

    def jac(z):
        x = z[:n] * xs
        hess_u = h.potential_hessian(x)
        d_xx = -0.5 * c_inv @ g  # du/dx included in dx row
        d_xp = c_inv
        d_px = -(-0.25 * g @ c_inv @ g + m0 + hess_u)
        d_pp = -0.5 * g @ c_inv
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = d_xx / omega
        out[:n, n:] = d_xp * (ps / (xs * omega))
        out[n:, :n] = d_px * (xs / (ps * omega))
        out[n:, n:] = d_pp / omega
        return out

    times = np.arange(steps + 1) * dt
    coords = np.zeros((steps + 1, n))
    moms = np.zeros((steps + 1, n))
    energies = np.zeros(steps + 1)

    def record(k, z):
        coords[k] = z[:n] * xs
        moms[k] = z[n:] * ps
        energies[k] = hamiltonian_value(h, coords[k], moms[k])

    z0 = np.concatenate([x0 / xs, p0 / ps])
    _implicit_midpoint(z0, deriv, jac, tau, steps, record)
    return Trajectory(times, coords, moms, energies, np.zeros(steps + 1))


# ------------------------------------------------- raw constrained system


@dataclass(frozen=True)
class _SdeviceSystem:
    s: np.ndarray
    r: float
    v_minus1: np.ndarray | None
    c_port: np.ndarray
    junction_rows: np.ndarray  # port pattern per junction
    junction_energies: np.ndarray
    junction_offsets: np.ndarray  # rad


def _sdevice_system(netlist: Netlist) -> _SdeviceSystem:
    devices = netlist.of_type(NonreciprocalDevice)
    if len(devices) != 1 or devices[0].description.kind != "S":
        raise TopologyUnsupportedError("need exactly one S-described device")
    dev = devices[0]
    s = dev.description.matrix

    graph = build_graph(netlist)
    loops = loop_matrix(graph, select_tree(graph, "sdevice"))
    f_gc = loops.block("G", "C").astype(float)
    f_gj = loops.block("G", "J").astype(float)
    cvals = np.array([_cap_value(netlist, nm) for nm in loops.col_names("C")])
    c_port = f_gc @ np.diag(cvals) @ f_gc.T

    phase_scale = 2.0 * np.pi / netlist.units.phi0
    j_cols = loops.cols_of("J")
    rows, energies, offsets = [], [], []
    for k, jname in enumerate(loops.col_names("J")):
        jj = netlist.element(jname)
        rows.append(f_gj[:, k])
        energies.append(jj.ej)
        offsets.append(-phase_scale * loops.flux_offsets[j_cols[k]])

    eigs = np.linalg.eigvals(s)
    v_minus1 = None
    if np.any(np.abs(eigs + 1.0) < 1e-9):
        from .reducer import real_basis

        v_minus1 = real_basis(s)[0]

    return _SdeviceSystem(
        s,
        dev.r_ref,
        v_minus1,
        c_port,
        np.array(rows),
        np.array(energies),
        np.array(offsets),
    )


def integrate_full_sdevice(
    netlist: Netlist,
    phi0: np.ndarray,
    phidot0: np.ndarray,
    dt: float,
    steps: int,
) -> Trajectory:
    """Integrate the raw port-space device equation

        -R (1 + S)(C d2Phi/dt2 + grad U) = (1 - S) dPhi/dt,

    as a constrained system: the frozen velocity component v_-1 . dPhi/dt
    is projected out after every accepted step, and its pre-projection
    magnitude is recorded (ConstraintViolationError when it exceeds the
    tolerance in scaled units).  The ``momenta`` field of the returned
    trajectory holds the port voltages dPhi/dt, not conjugate charges.
    """
    sys = _sdevice_system(netlist)
    n = sys.s.shape[0]
    phi0 = np.asarray(phi0, dtype=float)
    v0 = np.asarray(phidot0, dtype=float)
    if phi0.shape != (n,) or v0.shape != (n,):
        raise DimensionMismatchError(f"state must have {n} ports")

    phase_scale = 2.0 * np.pi / netlist.units.phi0

    def grad_u(phi):
        g = np.zeros(n)
        for row, e, off in zip(sys.junction_rows, sys.junction_energies, sys.junction_offsets):
            g += e * np.sin(phase_scale * (row @ phi) + off) * phase_scale * row
        return g

    def hess_u(phi):
        out = np.zeros((n, n))
        for row, e, off in zip(sys.junction_rows, sys.junction_energies, sys.junction_offsets):
            out += (
                e
                * np.cos(phase_scale * (row @ phi) + off)
                * phase_scale**2
                * np.outer(row, row)
            )
        return out

    one = np.eye(n)
    m_sys = (one + sys.s) @ sys.c_port
    if sys.v_minus1 is not None:
        m_sys = m_sys + np.outer(sys.v_minus1, sys.v_minus1)
    m_inv = np.linalg.inv(m_sys)
    a_vel = -m_inv @ (one - sys.s) / sys.r
    a_pot = -m_inv @ (one + sys.s)

    c_typ = np.abs(np.diag(sys.c_port)).max()
    k_typ = max(
        np.linalg.norm(hess_u(phi0), 2) / c_typ, (1.0 / (sys.r * c_typ)) ** 2, 1e-300
    )
    omega = np.sqrt(k_typ)
    xs = PHI0_BAR
    vs = xs * omega

    if sys.v_minus1 is not None:
        v0 = v0 - sys.v_minus1 * (sys.v_minus1 @ v0)

    def deriv(z):
        phi = z[:n] * xs
        vel = z[n:] * vs
        acc = a_vel @ vel + a_pot @ grad_u(phi)
        return np.concatenate([vel / (xs * omega), acc / (vs * omega)])

    def jac(z):
        phi = z[:n] * xs
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = np.eye(n) * (vs / (xs * omega))
        out[n:, :n] = (a_pot @ hess_u(phi)) * (xs / (vs * omega))
        out[n:, n:] = a_vel / omega
        return out

    times = np.arange(steps + 1) * dt
    coords = np.zeros((steps + 1, n))
    vels = np.zeros((steps + 1, n))
    energies = np.zeros(steps + 1)
    resid = np.zeros(steps + 1)

    def energy(phi, vel):
        kin = 0.5 * vel @ sys.c_port @ vel
        pot = -sum(
            e * np.cos(phase_scale * (row @ phi) + off)
            for row, e, off in zip(
                sys.junction_rows, sys.junction_energies, sys.junction_offsets
            )
        )
        return kin + pot

    state = np.concatenate([phi0 / xs, v0 / vs])
    coords[0], vels[0] = phi0, v0
    energies[0] = energy(phi0, v0)

    tau = dt * omega
    eye = np.eye(2 * n)
    z = state
    for k in range(steps):
        z_new = z + tau * deriv(z)
        converged = False
        for _ in range(NEWTON_MAX_ITER):
            mid = 0.5 * (z + z_new)
            res = z_new - z - tau * deriv(mid)
            if np.linalg.norm(res, np.inf) < NEWTON_TOL * max(
                1.0, np.linalg.norm(z_new, np.inf)
            ):
                converged = True
                break
            z_new = z_new - np.linalg.solve(eye - 0.5 * tau * jac(mid), res)
        if not converged:
            raise NonConvergenceError(f"constrained integration stalled at step {k}")
        z = z_new
        if sys.v_minus1 is not None:
            drift = abs(sys.v_minus1 @ z[n:])  # scaled velocity units
            resid[k + 1] = drift
            if drift > CONSTRAINT_TOL:
                raise ConstraintViolationError(
                    f"frozen velocity drifted to {drift:.3e} at step {k + 1}"
                )
            z[n:] = z[n:] - sys.v_minus1 * (sys.v_minus1 @ z[n:])
        coords[k + 1] = z[:n] * xs
        vels[k + 1] = z[n:] * vs
        energies[k + 1] = energy(coords[k + 1], vels[k + 1])

    return Trajectory(times, coords, vels, energies, resid)


# -------------------------------------------------------------- spectrum


def linearized_frequencies(h: QuadraticFluxHamiltonian) -> np.ndarray:
    """|Im| of the companion-matrix spectrum, one entry per mode pair.

    Zero frequencies (free modes) are dropped; the result is ascending
    in rad/s.  This is a plain dense eigensolve of the first-order form
    of the Euler-Lagrange equations and shares no code with the
    symplectic pipeline.
    """
    n = h.n_vars
    c_inv = np.linalg.inv(h.kinetic)
    k_eff = h.harmonic_inductive()
    comp = np.zeros((2 * n, 2 * n))
    comp[:n, n:] = np.eye(n)
    comp[n:, :n] = -c_inv @ k_eff
    comp[n:, n:] = -c_inv @ h.gyration
    mu = np.linalg.eigvals(comp)
    scale = max(np.abs(mu).max(), 1e-300)
    pos = np.sort(mu.imag[mu.imag > 1e-10 * scale])
    return pos


# ------------------------------------------------------------- Kirchhoff


@dataclass(frozen=True)
class ResidualReport:
    kcl_max: float
    kcl_scale: float
    kvl_max: float
    kvl_scale: float

    @property
    def kcl_relative(self) -> float:
        return self.kcl_max / max(self.kcl_scale, 1e-300)

    @property
    def kvl_relative(self) -> float:
        return self.kvl_max / max(self.kvl_scale, 1e-300)


def kirchhoff_residual(
    netlist: Netlist, trajectory: Trajectory, mode: str = "bkd"
) -> ResidualReport:
    """Check a capacitor-tree trajectory against the raw circuit laws.

    Branch currents are reconstructed from constitutive laws (junction
    sine, inductor flux, device admittance, transformer turns) with time
    derivatives taken by central differences of the coordinate history;
    the current law residual is max over interior times of
    |F I_ch + I_tr|.  The voltage law residual compares the tree
    voltages derived from the conjugate momenta against the
    finite-difference flux velocities.
    """
    if mode != "bkd":
        raise TopologyUnsupportedError("residual reconstruction expects a capacitor tree")
    graph = build_graph(netlist)
    loops = loop_matrix(graph, select_tree(graph, "bkd"))
    from .hamiltonian import assemble_bkd

    h = assemble_bkd(netlist)
    n = h.n_vars
    if trajectory.coordinates.shape[1] != n:
        raise DimensionMismatchError(
            f"trajectory has {trajectory.coordinates.shape[1]} variables, circuit has {n}"
        )

    phi = trajectory.coordinates
    q = trajectory.momenta
    dt = trajectory.times[1] - trajectory.times[0]

    # central differences on the interior
    vel = (phi[2:] - phi[:-2]) / (2 * dt)
    acc = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dt**2
    phi_mid = phi[1:-1]
    q_mid = q[1:-1]

    turns = combined_turns_matrix(netlist, loops)
    f = loops.matrix.astype(float)
    rows_c = loops.rows_of("C")
    rows_tl = loops.rows_of("TL")
    cols = {
        cls: loops.cols_of(cls) for cls in ("J", "L", "G", "TR")
    }

    cvals = np.array([_cap_value(netlist, nm) for nm in loops.row_names("C")])
    lvals = np.array([netlist.element(nm).value for nm in loops.col_names("L")])
    phase_scale = 2.0 * np.pi / netlist.units.phi0

    y_big = np.zeros((len(cols["G"]), len(cols["G"])))
    gnames = loops.col_names("G")
    pos = {nm: i for i, nm in enumerate(gnames)}
    for dev in netlist.of_type(NonreciprocalDevice):
        idx = [pos[dev.branch_name(k)] for k in range(dev.n_ports)]
        y_big[np.ix_(idx, idx)] = immittance_convert(dev.description, "Y").matrix

    ej = np.array([netlist.element(nm).ej for nm in loops.col_names("J")])
    ic = ej * phase_scale  # critical currents

    # effective chord fluxes/voltages: tree = capacitors plus left windings,
    # with left-winding fluxes reconstructed through the turns matrix
    f_ctr = f[np.ix_(rows_c, cols["TR"])]
    if rows_tl:
        f_tl = f[rows_tl, :]
        phi_tl = (turns.T @ f_ctr.T @ phi_mid.T).T  # N^T F_CTR^T Phi_C
        vel_tl = (turns.T @ f_ctr.T @ vel.T).T
    f_c = f[rows_c, :]

    flux_off = loops.flux_offsets

    kcl_max = 0.0
    kcl_scale = 0.0
    kvl_max = 0.0
    kvl_scale = 0.0

    c_mat, g_mat = h.kinetic, h.gyration
    c_inv = np.linalg.inv(c_mat)

    for t in range(phi_mid.shape[0]):
        x, v, a, p = phi_mid[t], vel[t], acc[t], q_mid[t]
        chord_flux = f_c.T @ x - flux_off
        chord_vel = f_c.T @ v
        if rows_tl:
            chord_flux = chord_flux + f_tl.T @ phi_tl[t]
            chord_vel = chord_vel + f_tl.T @ vel_tl[t]

        i_ch = np.zeros(f.shape[1])
        if cols["J"]:
            i_ch[cols["J"]] = ic * np.sin(phase_scale * chord_flux[cols["J"]])
        if cols["L"]:
            i_ch[cols["L"]] = chord_flux[cols["L"]] / lvals
        if cols["G"]:
            i_ch[cols["G"]] = y_big @ chord_vel[cols["G"]]
        if cols["TR"]:
            # I_TR = N (F_TL,L I_L + F_TL,G I_G + ...) over non-TR chords
            keep = [j for j in range(f.shape[1]) if j not in cols["TR"]]
            i_tl = f_tl[:, keep] @ i_ch[keep]
            i_ch[cols["TR"]] = turns @ i_tl

        i_tr_c = cvals * a
        residual = f[rows_c, :] @ i_ch + i_tr_c
        kcl_max = max(kcl_max, np.abs(residual).max())
        kcl_scale = max(kcl_scale, np.abs(i_ch).max(), np.abs(i_tr_c).max())

        v_from_q = c_inv @ (p - 0.5 * g_mat @ x)
        kvl_res = f_c.T @ (v_from_q - v)
        kvl_max = max(kvl_max, np.abs(kvl_res).max())
        kvl_scale = max(kvl_scale, np.abs(f_c.T @ v).max())

    return ResidualReport(kcl_max, kcl_scale, kvl_max, kvl_scale)
