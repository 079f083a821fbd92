"""Assembly of the quadratic-plus-cosine Hamiltonians.

Three flux-variable routes and one charge-variable route:

* ``assemble_bkd``: all capacitors in the tree, junctions / inductors /
  NR branches in the chord set.  Variables are the tree capacitor
  fluxes; M0 = F_CL^eff L^-1 (F_CL^eff)^T and G = F_CG^eff Y (F_CG^eff)^T.
* ``assemble_burkard``: junctions and inductors in the tree, capacitors
  in the chord set, NR branches on both sides; variables (Phi_J, Phi_L,
  Phi_Gtr).
* ``assemble_sdevice``: the device branches form the tree and the
  frozen flux combination of a scattering-only device is removed first;
  variables are the reduced coordinates f.
* ``assemble_charge_dual``: phase-slip junctions in series with
  inductors shunting a Z-described device; charge variables.

Every route produces matrices such that the conjugate momenta are
p = Kinetic * xdot + (1/2) Gyration * x and

    H = 1/2 (p - G x / 2)^T Kinetic^-1 (p - G x / 2)
        + 1/2 x^T Inductive x - sum_i E_i cos(row_i . x + offset_i).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockPartitionError,
    DimensionMismatchError,
    InfeasibleTreeError,
    ModeViolationError,
    NoAdmittanceError,
    SingularKineticError,
    TopologyUnsupportedError,
)
from .graph import CircuitGraph, LoopMatrix, build_graph, loop_matrix, select_tree
from .immittance import immittance_convert
from .netlist import (
    Capacitor,
    Inductor,
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
    PhaseSlip,
    TransformerBank,
)
from .reducer import (
    EffectiveLoops,
    ReductionRecord,
    SKEW_ASSERT_TOL,
    combined_turns_matrix,
    eliminate_transformers,
    freeze_reduction,
)


@dataclass(frozen=True)
class PotentialTerm:
    """One -E cos(row . x + offset) contribution."""

    energy: float  # J
    row: np.ndarray  # phase per unit coordinate
    offset: float  # rad
    label: str

    def __eq__(self, other) -> bool:
        if not isinstance(other, PotentialTerm):
            return NotImplemented
        return (
            self.energy == other.energy
            and self.offset == other.offset
            and self.label == other.label
            and np.array_equal(self.row, other.row)
        )


@dataclass(frozen=True)
class QuadraticFluxHamiltonian:
    kinetic: np.ndarray  # F
    inductive: np.ndarray  # 1/H
    gyration: np.ndarray  # 1/Ohm
    potential: tuple  # PotentialTerm...
    labels: tuple
    alpha: float = 0.0  # frozen flux constant, Wb (scattering route only)
    reduction: ReductionRecord | None = None

    @property
    def n_vars(self) -> int:
        return self.kinetic.shape[0]

    @property
    def alpha_offsets(self) -> np.ndarray:
        return np.array([t.offset for t in self.potential])

    def potential_value(self, x: np.ndarray) -> float:
        return -sum(t.energy * np.cos(t.row @ x + t.offset) for t in self.potential)

    def potential_gradient(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(self.n_vars)
        for t in self.potential:
            g += t.energy * np.sin(t.row @ x + t.offset) * t.row
        return g

    def potential_hessian(self, x: np.ndarray) -> np.ndarray:
        h = np.zeros((self.n_vars, self.n_vars))
        for t in self.potential:
            h += t.energy * np.cos(t.row @ x + t.offset) * np.outer(t.row, t.row)
        return h

    def harmonic_inductive(self) -> np.ndarray:
        """Inductive matrix with the potential linearized at the origin."""
        return self.inductive + self.potential_hessian(np.zeros(self.n_vars))

    def to_json_dict(self) -> dict:
        return {
            "variables": list(self.labels),
            "kinetic_f": self.kinetic.tolist(),
            "inductive_inv_h": self.inductive.tolist(),
            "gyration_inv_ohm": self.gyration.tolist(),
            "potential": [
                {
                    "label": t.label,
                    "energy_j": float(t.energy),
                    "row_rad_per_unit": list(map(float, t.row)),
                    "offset_rad": float(t.offset),
                }
                for t in self.potential
            ],
            "alpha_wb": float(self.alpha),
            "reduction": None if self.reduction is None else self.reduction.to_json_dict(),
        }


@dataclass(frozen=True)
class ChargeDualHamiltonian:
    """Charge-variable dual: H = 1/2 (Phi - Z_G Q / 2)^T L^-1 (...) + U(Q)."""

    inductive_inverse: np.ndarray  # diagonal, 1/H
    z_gyration: np.ndarray  # Ohm, skew-symmetric
    potential: tuple  # PotentialTerm over charge coordinates
    labels: tuple

    @property
    def n_vars(self) -> int:
        return self.inductive_inverse.shape[0]

    def as_flux_form(self) -> QuadraticFluxHamiltonian:
        """Same mechanics with (position, momentum) = (Q, Phi).

        The kinetic matrix is the inductance matrix and the gyration
        matrix is Z_G, so all flux-form machinery (integration, normal
        modes) applies unchanged.
        """
        return QuadraticFluxHamiltonian(
            kinetic=np.linalg.inv(self.inductive_inverse),
            inductive=np.zeros_like(self.inductive_inverse),
            gyration=self.z_gyration.copy(),
            potential=self.potential,
            labels=self.labels,
        )

    def to_json_dict(self) -> dict:
        return {
            "variables": list(self.labels),
            "inductive_inverse_inv_h": self.inductive_inverse.tolist(),
            "z_gyration_ohm": self.z_gyration.tolist(),
            "potential": [
                {
                    "label": t.label,
                    "energy_j": float(t.energy),
                    "row_rad_per_coulomb": list(map(float, t.row)),
                    "offset_rad": float(t.offset),
                }
                for t in self.potential
            ],
        }


def hamiltonian_value(h: QuadraticFluxHamiltonian, x: np.ndarray, p: np.ndarray) -> float:
    """Energy of a classical state (coordinates x, conjugate momenta p)."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != (h.n_vars,) or p.shape != (h.n_vars,):
        raise DimensionMismatchError(
            f"state dimension {x.shape}/{p.shape} != ({h.n_vars},)"
        )
    u = p - 0.5 * h.gyration @ x
    kin = 0.5 * u @ np.linalg.solve(h.kinetic, u)
    ind = 0.5 * x @ h.inductive @ x
    return float(kin + ind + h.potential_value(x))


# ------------------------------------------------------------------ utils


def _skew_guard(g: np.ndarray, what: str) -> np.ndarray:
    asym = np.abs(g + g.T).max()
    scale = max(1.0, np.abs(g).max())
    if asym > SKEW_ASSERT_TOL * scale:
        raise BlockPartitionError(f"{what} asymmetry {asym:.3e} exceeds tolerance")
    return 0.5 * (g - g.T)


def _effective(netlist: Netlist, loops: LoopMatrix) -> EffectiveLoops:
    turns = combined_turns_matrix(netlist, loops)
    return eliminate_transformers(loops, turns)


def _device_for_branch(netlist: Netlist, branch_name: str):
    dev_name = branch_name.split(".p", 1)[0]
    return netlist.element(dev_name)


def _device_admittances(
    netlist: Netlist, g_col_names: list[str], embed: np.ndarray
) -> np.ndarray:
    """Block admittance over NR branch columns; SingularKineticError when
    a device has no admittance description.

    ``embed`` maps device-branch space into the tentative variable space
    and is only used to report the frozen direction of the failure.
    """
    n = len(g_col_names)
    y = np.zeros((n, n))
    pos = {name: i for i, name in enumerate(g_col_names)}
    for dev in netlist.of_type(NonreciprocalDevice):
        idx = [pos[dev.branch_name(k)] for k in range(dev.n_ports)]
        try:
            y_dev = immittance_convert(dev.description, "Y").matrix
        except NoAdmittanceError as err:
            from .reducer import circulator_spectrum

            s = immittance_convert(dev.description, "S").matrix
            spec = circulator_spectrum(s)
            basis = []
            for val, vec in spec.pairs():
                if abs(val + 1.0) < 1e-9:
                    direction = embed[:, idx] @ np.real(vec)
                    norm = np.linalg.norm(direction)
                    if norm > 0:
                        basis.append(direction / norm)
            raise SingularKineticError(
                f"device {dev.name!r} has no admittance description "
                "(S has a -1 eigenvalue): the kinetic matrix is degenerate "
                "along the frozen flux direction; use the scattering route",
                null_basis=np.array(basis) if basis else None,
            ) from err
        y[np.ix_(idx, idx)] = y_dev
    return y


def _junction_order(eff_or_loops) -> list[str]:
    return eff_or_loops.col_names("J")


# ------------------------------------------------------------------- BKD


def assemble_bkd(netlist: Netlist) -> QuadraticFluxHamiltonian:
    """Flux Hamiltonian with all capacitors as tree branches."""
    if netlist.of_type(PhaseSlip):
        raise ModeViolationError("phase-slip elements need the charge-dual route")

    graph = build_graph(netlist)
    partition = select_tree(graph, "bkd")
    loops = loop_matrix(graph, partition)

    if loops.rows_of("L"):
        raise InfeasibleTreeError(
            "an inductor ended up in the tree; this route requires all "
            "inductors to close chord loops"
        )
    if loops.rows_of("TL") and np.any(loops.block("TL", "J") != 0):
        raise BlockPartitionError("a junction loop crosses a transformer winding")

    eff = _effective(netlist, loops)

    cap_names = eff.row_names("C")
    cvals = np.array([_cap_value(netlist, name) for name in cap_names])
    kinetic = np.diag(cvals)

    f_cl = eff.block("C", "L")
    lvals = np.array([netlist.element(n).value for n in eff.col_names("L")])
    inductive = (
        f_cl @ np.diag(1.0 / lvals) @ f_cl.T if lvals.size else np.zeros_like(kinetic)
    )

    f_cg = eff.block("C", "G")
    y_big = _device_admittances(netlist, eff.col_names("G"), f_cg)
    gyration = (
        _skew_guard(f_cg @ y_big @ f_cg.T, "gyration matrix")
        if f_cg.size
        else np.zeros_like(kinetic)
    )

    phase_scale = 2.0 * np.pi / netlist.units.phi0
    f_cj = eff.block("C", "J")
    j_cols = eff.cols_of("J")
    terms = []
    for k, jname in enumerate(eff.col_names("J")):
        jj = netlist.element(jname)
        row = phase_scale * f_cj[:, k]
        offset = -phase_scale * eff.flux_offsets[j_cols[k]]
        terms.append(PotentialTerm(jj.ej, row, offset, jname))

    return QuadraticFluxHamiltonian(
        kinetic=kinetic,
        inductive=inductive,
        gyration=gyration,
        potential=tuple(terms),
        labels=tuple(cap_names),
    )


def _cap_value(netlist: Netlist, branch_name: str) -> float:
    if branch_name.endswith("_cj"):
        owner = branch_name[: -len("_cj")]
        for el in netlist.elements:
            if el.name == owner and isinstance(el, JosephsonJunction):
                return el.cj
    return netlist.element(branch_name).value


# --------------------------------------------------------------- Burkard


def assemble_burkard(netlist: Netlist) -> QuadraticFluxHamiltonian:
    """Flux Hamiltonian with junctions and inductors as tree branches."""
    if netlist.of_type(PhaseSlip):
        raise ModeViolationError("phase-slip elements need the charge-dual route")

    graph = build_graph(netlist)
    partition = select_tree(graph, "burkard")
    loops = loop_matrix(graph, partition)

    _check_nr_shunted(netlist, graph)

    eff = _effective(netlist, loops)

    j_names = eff.row_names("J")
    l_names = eff.row_names("L")
    gtr_names = eff.row_names("G")
    gch_names = eff.col_names("G")
    n_j, n_l, n_gtr = len(j_names), len(l_names), len(gtr_names)
    n_vars = n_j + n_l + n_gtr

    shunt_names = [netlist.element(j).shunt_name for j in j_names]
    chord_caps = eff.col_names("C")
    if chord_caps[: len(shunt_names)] != shunt_names:
        raise BlockPartitionError(
            "junction shunt columns are not aligned with junction rows"
        )
    f_jcj = eff.block("J", "C")[:, : len(shunt_names)]
    if not np.array_equal(f_jcj, np.eye(n_j)):
        raise BlockPartitionError("junction shunt loops are not in one-to-one form")

    other_caps = chord_caps[len(shunt_names) :]
    c_other = np.diag([_cap_value(netlist, n) for n in other_caps])

    rows_all = eff.rows_of("J") + eff.rows_of("L") + eff.rows_of("G")
    c_cols_other = eff.cols_of("C")[len(shunt_names) :]
    f_c = eff.matrix[np.ix_(rows_all, c_cols_other)]

    cj_diag = np.zeros((n_vars, n_vars))
    cj_diag[:n_j, :n_j] = np.diag([netlist.element(j).cj for j in j_names])
    kinetic = cj_diag + (f_c @ c_other @ f_c.T if other_caps else 0.0)

    inductive = np.zeros((n_vars, n_vars))
    if n_l:
        lvals = np.array([netlist.element(n).value for n in l_names])
        inductive[n_j : n_j + n_l, n_j : n_j + n_l] = np.diag(1.0 / lvals)

    gyration = _burkard_gyration(netlist, eff, rows_all, n_j, n_l, gtr_names, gch_names)

    phase_scale = 2.0 * np.pi / netlist.units.phi0
    terms = []
    for k, jname in enumerate(j_names):
        jj = netlist.element(jname)
        row = np.zeros(n_vars)
        row[k] = phase_scale
        terms.append(PotentialTerm(jj.ej, row, 0.0, jname))

    return QuadraticFluxHamiltonian(
        kinetic=kinetic,
        inductive=inductive,
        gyration=gyration,
        potential=tuple(terms),
        labels=tuple(j_names + l_names + gtr_names),
    )


def _check_nr_shunted(netlist: Netlist, graph: CircuitGraph):
    cap_pairs = set()
    for b in graph.branches:
        if b.cls == "C":
            cap_pairs.add(frozenset((b.node_from, b.node_to)))
    for b in graph.branches:
        if b.cls == "G" and frozenset((b.node_from, b.node_to)) not in cap_pairs:
            raise InfeasibleTreeError(
                f"NR branch {b.name!r} is not capacitor-shunted; this route "
                "requires an independent shunt per branch"
            )


def _burkard_gyration(
    netlist: Netlist,
    eff: EffectiveLoops,
    rows_all: list[int],
    n_j: int,
    n_l: int,
    gtr_names: list[str],
    gch_names: list[str],
) -> np.ndarray:
    n_gtr = len(gtr_names)
    n_vars = len(rows_all)
    all_branch_names = gtr_names + gch_names
    if not all_branch_names:
        return np.zeros((n_vars, n_vars))

    embed = np.zeros((n_vars, len(all_branch_names)))
    embed[n_j + n_l :, :n_gtr] = np.eye(n_gtr)
    gch_cols = eff.cols_of("G")
    embed[:, n_gtr:] = eff.matrix[np.ix_(rows_all, gch_cols)]
    y_all = _device_admittances(netlist, all_branch_names, embed)

    y_trtr = y_all[:n_gtr, :n_gtr]
    y_trch = y_all[:n_gtr, n_gtr:]
    y_chtr = y_all[n_gtr:, :n_gtr]
    y_chch = y_all[n_gtr:, n_gtr:]

    f_jg = eff.block("J", "G")
    f_lg = eff.block("L", "G")
    f_gg = eff.block("G", "G")

    g_jj = f_jg @ y_chch @ f_jg.T
    g_jl = f_jg @ y_chch @ f_lg.T
    g_ll = f_lg @ y_chch @ f_lg.T
    cross = y_chtr + y_chch @ f_gg.T
    g_jg = f_jg @ cross
    g_lg = f_lg @ cross
    g_gg = f_gg @ y_chch @ f_gg.T + y_trtr + f_gg @ y_chtr + y_trch @ f_gg.T

    g = np.zeros((n_vars, n_vars))
    sl_j = slice(0, n_j)
    sl_l = slice(n_j, n_j + n_l)
    sl_g = slice(n_j + n_l, n_vars)
    g[sl_j, sl_j] = g_jj
    g[sl_j, sl_l] = g_jl
    g[sl_l, sl_j] = -g_jl.T
    g[sl_l, sl_l] = g_ll
    g[sl_j, sl_g] = g_jg
    g[sl_g, sl_j] = -g_jg.T
    g[sl_l, sl_g] = g_lg
    g[sl_g, sl_l] = -g_lg.T
    g[sl_g, sl_g] = g_gg
    return _skew_guard(g, "gyration matrix")


# ------------------------------------------------------------- S-device


def assemble_sdevice(netlist: Netlist, alpha: float = 0.0) -> QuadraticFluxHamiltonian:
    """Reduced flux Hamiltonian for a scattering-described device.

    The device branches form the tree.  If S has a -1 eigenvalue, the
    frozen flux combination alpha * v_-1 is split off and the returned
    variables are the dynamical coordinates f; otherwise all port fluxes
    stay dynamical.
    """
    if netlist.of_type(PhaseSlip):
        raise ModeViolationError("phase-slip elements need the charge-dual route")
    if netlist.of_type(Inductor):
        raise TopologyUnsupportedError(
            "inductors are not supported on the scattering route"
        )
    devices = netlist.of_type(NonreciprocalDevice)
    if len(devices) != 1:
        raise TopologyUnsupportedError(
            f"the scattering route needs exactly one NR device, found {len(devices)}"
        )
    dev = devices[0]
    if dev.description.kind != "S":
        raise ModeViolationError(
            "the scattering route requires the device in S form; convert first"
        )

    graph = build_graph(netlist)
    partition = select_tree(graph, "sdevice")
    loops = loop_matrix(graph, partition)

    g_rows = loops.row_names("G")
    expected = [dev.branch_name(k) for k in range(dev.n_ports)]
    if g_rows != sorted(expected):
        raise TopologyUnsupportedError("device branches do not form the tree")

    f_gc = loops.block("G", "C").astype(float)
    f_gj = loops.block("G", "J").astype(float)

    cvals = np.array([_cap_value(netlist, n) for n in loops.col_names("C")])
    c_port = f_gc @ np.diag(cvals) @ f_gc.T
    if np.linalg.eigvalsh(c_port).min() <= 0:
        raise SingularKineticError("every device port needs a shunt capacitance")

    record = freeze_reduction(dev.description.matrix, c_port, dev.r_ref, alpha=alpha)
    w = record.dynamical_basis
    n_red = w.shape[0]

    phase_scale = 2.0 * np.pi / netlist.units.phi0
    j_cols = loops.cols_of("J")
    terms = []
    for k, jname in enumerate(loops.col_names("J")):
        jj = netlist.element(jname)
        port_pattern = f_gj[:, k]  # junction flux in the port basis
        row = phase_scale * (w @ port_pattern)
        offset = phase_scale * (
            (record.v_minus1 @ port_pattern) * alpha if record.frozen else 0.0
        ) - phase_scale * loops.flux_offsets[j_cols[k]]
        terms.append(PotentialTerm(jj.ej, row, offset, jname))

    return QuadraticFluxHamiltonian(
        kinetic=record.c_reduced,
        inductive=np.zeros((n_red, n_red)),
        gyration=record.g_reduced,
        potential=tuple(terms),
        labels=tuple(f"f{i + 1}" for i in range(n_red)),
        alpha=alpha,
        reduction=record,
    )


# ----------------------------------------------------------- charge dual


def assemble_charge_dual(netlist: Netlist) -> ChargeDualHamiltonian:
    """Charge-variable Hamiltonian for phase-slip / Z-device circuits."""
    slips = netlist.of_type(PhaseSlip)
    if not slips:
        raise TopologyUnsupportedError("the charge-dual route needs phase-slip elements")
    for el in netlist.elements:
        if not isinstance(el, (PhaseSlip, NonreciprocalDevice)):
            raise TopologyUnsupportedError(
                f"element {el.name!r} is outside the charge-dual circuit class"
            )

    devices = netlist.of_type(NonreciprocalDevice)
    if len(devices) > 1:
        raise TopologyUnsupportedError("at most one NR device is supported")

    slips = sorted(slips, key=lambda p: p.name)

    if devices:
        dev = devices[0]
        z = immittance_convert(dev.description, "Z")  # NoImpedanceError propagates
        ordered = []
        for a, b in dev.ports:
            match = [p for p in slips if (p.node_p, p.node_m) == (a, b)]
            if len(match) != 1:
                raise TopologyUnsupportedError(
                    f"port ({a}, {b}) of {dev.name!r} needs exactly one "
                    "phase-slip + inductor shunt with matching orientation"
                )
            ordered.append(match[0])
        if len(ordered) != len(slips):
            raise TopologyUnsupportedError("every phase-slip element must shunt a port")
        slips = ordered
        z_g = z.matrix.copy()
    else:
        for p in slips:
            if p.node_p != p.node_m:
                raise TopologyUnsupportedError(
                    f"phase-slip {p.name!r} does not close a loop on its own"
                )
        z_g = np.zeros((len(slips), len(slips)))

    l_inv = np.diag([1.0 / p.l_series for p in slips])
    charge_scale = np.pi / netlist.units.e
    terms = []
    for k, p in enumerate(slips):
        row = np.zeros(len(slips))
        row[k] = charge_scale
        terms.append(PotentialTerm(p.es, row, 0.0, p.name))

    return ChargeDualHamiltonian(
        inductive_inverse=l_inv,
        z_gyration=0.5 * (z_g - z_g.T),
        potential=tuple(terms),
        labels=tuple(p.name for p in slips),
    )
