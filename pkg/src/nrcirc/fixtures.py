"""Reference circuits used throughout the tests and the CLI.

Four families:

* ``nr_blackbox_fig2`` - two shunted junctions capacitively coupled to a
  synthesized 2-port nonreciprocal lossless impedance: a direct gyrator
  stage, a gyrator-capacitor tank stage, one reciprocal LC stage, all
  fed through a six-winding/three-winding transformer bank.
* ``vd_gyrator`` - Hall-effect gyrator with each port loaded by a
  lumped-element half-wave resonator expansion (series C0 followed by N
  parallel LC tanks) terminating on a shunted junction.  The lumped
  values follow C0 = C_L/2, C_k = C_L/4, L_k = C_L/(sigma k pi)^2.
* ``circulator_jj`` - n-port cyclic scattering circulator with a
  shunted junction on every port; the (-1)^n sign convention gives it a
  -1 scattering eigenvalue for every n, so it has no admittance matrix.
* ``z_circulator_ps`` - the charge dual: an impedance-described
  circulator with a phase-slip junction in series with an inductor on
  every port.
"""

from __future__ import annotations

import numpy as np

from .errors import BadParamsError
from .immittance import (
    ImmittanceDescription,
    cyclic_circulator,
    gyrator_scattering,
    immittance_convert,
)
from .netlist import (
    Capacitor,
    Inductor,
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
    PhaseSlip,
    TransformerBank,
)

DEFAULT_EJ = 6.6e-24  # J, roughly a 10 GHz junction


def vd_gyrator(
    sigma: float = 0.02,
    c_line: float = 1e-12,
    n_stages: int = 1,
    c_jl: float = 1e-13,
    c_jr: float = 1e-13,
    e_jl: float = DEFAULT_EJ,
    e_jr: float = DEFAULT_EJ,
) -> Netlist:
    """Hall-effect gyrator with truncated line resonators and junctions."""
    if n_stages < 0:
        raise BadParamsError("n_stages must be >= 0")
    if sigma <= 0 or c_line <= 0:
        raise BadParamsError("sigma and c_line must be positive")
    if n_stages > 99:
        raise BadParamsError("n_stages beyond 99 breaks the naming scheme")

    r = 1.0 / sigma
    c0 = c_line / 2.0
    ck = c_line / 4.0

    elements: list = [
        JosephsonJunction("j1", "ja", "0", e_jl, c_jl),
        JosephsonJunction("j2", "jb", "0", e_jr, c_jr),
    ]

    for side, port, jnode in (("a", "pa", "ja"), ("b", "pb", "jb")):
        chain = [port] + [f"{side}{k}" for k in range(1, n_stages + 1)] + [jnode]
        elements.append(Capacitor(f"c{side}00", chain[0], chain[1], c0))
        for k in range(1, n_stages + 1):
            lk = c_line / (sigma * k * np.pi) ** 2
            elements.append(Capacitor(f"c{side}{k:02d}", chain[k], chain[k + 1], ck))
            elements.append(Inductor(f"l{side}{k:02d}", chain[k], chain[k + 1], lk))

    elements.append(
        NonreciprocalDevice(
            "g1", (("pa", "0"), ("pb", "0")), gyrator_scattering(r_ref=r)
        )
    )
    return Netlist(tuple(elements))


def nr_blackbox_fig2(
    c_j1: float = 1e-13,
    c_j2: float = 1e-13,
    c_g1: float = 5e-14,
    c_g2: float = 5e-14,
    c_1r: float = 2e-13,
    c_1l: float = 2e-13,
    c_2: float = 3e-13,
    l_2: float = 2e-9,
    e_j1: float = DEFAULT_EJ,
    e_j2: float = DEFAULT_EJ,
    r0: float = 50.0,
    r1: float = 75.0,
    n11l: float = 0.5,
    n12l: float = 0.5,
    n11r: float = 0.5,
    n12r: float = 0.5,
    n21: float = 0.5,
    n22: float = 0.5,
) -> Netlist:
    """Two junctions coupled to a synthesized 2-port NR impedance."""
    turns = np.array(
        [
            [n11l, 0.0, 0.0, n12l, 0.0, 0.0],
            [0.0, n11r, 0.0, 0.0, n12r, 0.0],
            [0.0, 0.0, n21, 0.0, 0.0, n22],
        ]
    )
    elements = (
        JosephsonJunction("j1", "a1", "0", e_j1, c_j1),
        JosephsonJunction("j2", "a2", "0", e_j2, c_j2),
        Capacitor("cp1", "b1", "a1", c_g1),
        Capacitor("cp2", "b2", "a2", c_g2),
        Capacitor("cs1", "r1", "0", c_1r),
        Capacitor("cs2", "r2", "0", c_1l),
        Capacitor("cs3", "s1", "0", c_2),
        Inductor("l1", "s1", "0", l_2),
        NonreciprocalDevice("g0", (("e1", "0"), ("e2", "0")), gyrator_scattering(r0)),
        NonreciprocalDevice("g1", (("r1", "0"), ("r2", "0")), gyrator_scattering(r1)),
        TransformerBank(
            "t1",
            (("e1", "d1"), ("d1", "c1"), ("c1", "b1"), ("e2", "d2"), ("d2", "c2"), ("c2", "b2")),
            (("r1", "0"), ("r2", "0"), ("s1", "0")),
            turns,
        ),
    )
    return Netlist(elements)


def _per_port(value, n: int, what: str) -> list[float]:
    if np.isscalar(value):
        return [float(value)] * n
    values = [float(v) for v in value]
    if len(values) != n:
        raise BadParamsError(f"{what} needs {n} entries, got {len(values)}")
    return values


def circulator_jj(
    n_ports: int = 3,
    c: float | list = 1e-13,
    e_j: float | list = DEFAULT_EJ,
    r: float = 50.0,
) -> Netlist:
    """Cyclic S-circulator with a shunted junction on every port."""
    if not 2 <= n_ports <= 9:
        raise BadParamsError("n_ports must be between 2 and 9")
    cs = _per_port(c, n_ports, "c")
    ejs = _per_port(e_j, n_ports, "e_j")
    elements = [
        JosephsonJunction(f"j{k + 1}", f"p{k + 1}", "0", ejs[k], cs[k])
        for k in range(n_ports)
    ]
    elements.append(
        NonreciprocalDevice(
            "s1",
            tuple((f"p{k + 1}", "0") for k in range(n_ports)),
            cyclic_circulator(n_ports, r_ref=r),
        )
    )
    return Netlist(tuple(elements))


def z_circulator_ps(
    n_ports: int = 3,
    l: float | list = 1e-9,
    e_s: float | list = 1e-24,
    r: float = 50.0,
) -> Netlist:
    """Impedance-described circulator with phase-slip + inductor shunts."""
    if not 2 <= n_ports <= 9:
        raise BadParamsError("n_ports must be between 2 and 9")
    if n_ports % 2 == 0:
        raise BadParamsError(
            "even cyclic circulators have a +1 scattering eigenvalue and "
            "no impedance description"
        )
    ls = _per_port(l, n_ports, "l")
    ess = _per_port(e_s, n_ports, "e_s")
    z = immittance_convert(cyclic_circulator(n_ports, r_ref=r), "Z")
    elements = [
        PhaseSlip(f"ps{k + 1}", f"p{k + 1}", "0", ess[k], ls[k])
        for k in range(n_ports)
    ]
    elements.append(
        NonreciprocalDevice(
            "z1",
            tuple((f"p{k + 1}", "0") for k in range(n_ports)),
            ImmittanceDescription("Z", z.matrix, r),
        )
    )
    return Netlist(tuple(elements))


FIXTURES = {
    "nr_blackbox_fig2": nr_blackbox_fig2,
    "vd_gyrator": vd_gyrator,
    "circulator_jj": circulator_jj,
    "z_circulator_ps": z_circulator_ps,
}


def fixture(name: str, **params) -> Netlist:
    """Build a bundled circuit by name; see :data:`FIXTURES`."""
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise BadParamsError(
            f"unknown fixture {name!r}; available: {', '.join(sorted(FIXTURES))}"
        ) from None
    try:
        return builder(**params)
    except TypeError as err:
        raise BadParamsError(str(err)) from None
