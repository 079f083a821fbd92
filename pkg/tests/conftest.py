import numpy as np
import pytest

from nrcirc import (
    Capacitor,
    Inductor,
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
    cyclic_circulator,
    gyrator_scattering,
    ideal_circulator,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_spd(rng, dim, floor=0.1):
    a = rng.standard_normal((dim, dim))
    return a @ a.T + floor * np.eye(dim)


def lc_netlist(c=1e-12, l=1e-9) -> Netlist:
    return Netlist((Capacitor("c1", "1", "0", c), Inductor("l1", "1", "0", l)))


def both_route_netlist(rng, n_sites=None):
    """Random circuit satisfying the capacitor-tree and junction-tree
    preconditions simultaneously: every capacitor is in parallel with a
    junction, an inductor, or an NR branch, all shunting to ground."""
    if n_sites is None:
        n_sites = int(rng.integers(2, 5))
    elements = []
    kinds = [rng.choice(["jj", "lc"]) for _ in range(n_sites)]
    for i, kind in enumerate(kinds):
        node = f"n{i + 1}"
        if kind == "jj":
            elements.append(
                JosephsonJunction(
                    f"j{i + 1}", node, "0",
                    float(10 ** rng.uniform(-24.5, -23.5)),
                    float(10 ** rng.uniform(-13.5, -12.5)),
                )
            )
        else:
            elements.append(
                Inductor(f"l{i + 1}", node, "0", float(10 ** rng.uniform(-9.5, -8.5)))
            )
            elements.append(
                Capacitor(f"c{i + 1}", node, "0", float(10 ** rng.uniform(-13.5, -12.5)))
            )
    # one gyrator across two fresh ports, each capacitor-shunted
    r = float(10 ** rng.uniform(1.2, 2.0))
    elements.append(
        NonreciprocalDevice(
            "g1", (("ga", "0"), ("gb", "0")), gyrator_scattering(r)
        )
    )
    elements.append(Capacitor("cga", "ga", "0", float(10 ** rng.uniform(-13.5, -12.5))))
    elements.append(Capacitor("cgb", "gb", "0", float(10 ** rng.uniform(-13.5, -12.5))))
    return Netlist(tuple(elements))


def plus_circulator(n=3, r=50.0):
    """Odd all-plus cyclic circulator: +1 eigenvalue present, -1 absent,
    so it is admittance-describable."""
    d = ideal_circulator(n, [1.0] * n)
    from nrcirc import ImmittanceDescription

    return ImmittanceDescription("S", d.matrix, r)
