import numpy as np
import pytest

from nrcirc import (
    DisconnectedError,
    InfeasibleTreeError,
    ModeViolationError,
    UnknownClassError,
    block,
    build_graph,
    circulator_jj,
    fixture,
    loop_matrix,
    nr_blackbox_fig2,
    parse_netlist,
    select_tree,
    vd_gyrator,
)


def bare_jj():
    return parse_netlist("JJ j1 1 0 EJ=1e-24 CJ=1e-13")


def test_bare_junction_expands_to_two_branches():
    g = build_graph(bare_jj())
    assert len(g.branches) == 2
    classes = sorted(b.cls for b in g.branches)
    assert classes == ["C", "J"]


def test_circulator_jj_branch_count():
    g = build_graph(circulator_jj(3))
    by_cls = {}
    for b in g.branches:
        by_cls.setdefault(b.cls, []).append(b.name)
    assert len(by_cls["G"]) == 3
    assert len(by_cls["J"]) == 3
    assert len(by_cls["C"]) == 3
    assert len(g.nodes) == 4


def test_vd_branch_count():
    n = 1
    g = build_graph(vd_gyrator(n_stages=n))
    by_cls = {}
    for b in g.branches:
        by_cls.setdefault(b.cls, []).append(b.name)
    assert len(by_cls["J"]) == 2
    assert len(by_cls["C"]) == 2 + 2 * (n + 1)
    assert len(by_cls["L"]) == 2 * n
    assert len(by_cls["G"]) == 2


def test_disconnected_raises():
    text = "C c1 1 0 1e-12\nL l1 1 0 1e-9\nC c2 5 6 1e-12\nL l2 5 6 1e-9"
    with pytest.raises(DisconnectedError):
        build_graph(parse_netlist(text))


def test_bkd_tree_bare_jj():
    g = build_graph(bare_jj())
    part = select_tree(g, "bkd")
    assert part.tree == ("j1_cj",)
    assert part.chord == ("j1",)


def test_bkd_capacitor_only_loop_is_hard_error():
    text = "C c1 1 0 1e-12\nC c2 1 0 2e-12\nL l1 1 0 1e-9"
    with pytest.raises(InfeasibleTreeError):
        select_tree(build_graph(parse_netlist(text)), "bkd")


def test_bkd_tree_vd_is_all_capacitors():
    g = build_graph(vd_gyrator(n_stages=2))
    part = select_tree(g, "bkd")
    tree_classes = {g.branch(n).cls for n in part.tree}
    assert tree_classes == {"C"}
    chord_classes = {g.branch(n).cls for n in part.chord}
    assert chord_classes == {"J", "L", "G"}


def test_sdevice_tree_is_circulator(rng):
    g = build_graph(circulator_jj(4))
    part = select_tree(g, "sdevice")
    assert {g.branch(n).cls for n in part.tree} == {"G"}
    assert {g.branch(n).cls for n in part.chord} == {"J", "C"}


def test_select_tree_deterministic():
    g = build_graph(fixture("nr_blackbox_fig2"))
    parts = [select_tree(g, "bkd") for _ in range(3)]
    assert parts[0] == parts[1] == parts[2]


def test_manual_tree_validated():
    g = build_graph(bare_jj())
    part = select_tree(g, "manual", manual_tree=("j1",))
    assert part.tree == ("j1",)
    with pytest.raises(InfeasibleTreeError):
        select_tree(g, "manual", manual_tree=("j1", "j1_cj"))
    with pytest.raises(ModeViolationError):
        select_tree(g, "manual", manual_tree=("nope",))


def test_loop_matrix_parallel_pair():
    g = build_graph(bare_jj())
    loops = loop_matrix(g, select_tree(g, "bkd"))
    assert loops.matrix.shape == (1, 1)
    assert loops.matrix[0, 0] == 1


def test_loop_matrix_entries_ternary():
    for name in ("nr_blackbox_fig2", "vd_gyrator", "circulator_jj"):
        g = build_graph(fixture(name))
        loops = loop_matrix(g, select_tree(g, "bkd" if name != "circulator_jj" else "sdevice"))
        assert set(np.unique(loops.matrix)).issubset({-1, 0, 1})


def test_vd_gyrator_loop_blocks():
    n = 2
    g = build_graph(vd_gyrator(n_stages=n))
    loops = loop_matrix(g, select_tree(g, "bkd"))
    f_cg = loops.block("C", "G")
    ones = np.ones(n + 1)
    expect = np.zeros((2 + 2 * (n + 1), 2))
    expect[0, 0] = 1
    expect[1, 1] = 1
    expect[2 : 3 + n, 0] = ones
    expect[3 + n :, 1] = ones
    assert np.array_equal(f_cg, expect)
    # each chord inductor loops through exactly its own tank capacitor
    f_cl = loops.block("C", "L")
    assert np.array_equal(f_cl.T @ f_cl, np.eye(2 * n))


def test_circulator_identity_blocks():
    g = build_graph(circulator_jj(3))
    loops = loop_matrix(g, select_tree(g, "sdevice"))
    assert np.array_equal(loops.block("G", "C"), np.eye(3))
    assert np.array_equal(loops.block("G", "J"), np.eye(3))


def test_block_unknown_class():
    g = build_graph(bare_jj())
    loops = loop_matrix(g, select_tree(g, "bkd"))
    with pytest.raises(UnknownClassError):
        block(loops, "C", "X")


def test_block_absent_class_is_empty():
    g = build_graph(bare_jj())
    loops = loop_matrix(g, select_tree(g, "bkd"))
    assert block(loops, "J", "J").shape == (0, 1)


def test_fig2_raw_blocks_match_reference_layout():
    g = build_graph(nr_blackbox_fig2())
    loops = loop_matrix(g, select_tree(g, "bkd"))
    assert loops.row_names("C") == ["j1_cj", "j2_cj", "cp1", "cp2", "cs1", "cs2", "cs3"]
    f_cg = loops.block("C", "G")
    expect_cg = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
        ]
    )
    assert np.array_equal(f_cg, expect_cg)
    f_ctr = loops.block("C", "TR")
    expect_ctr = np.zeros((7, 3))
    expect_ctr[4, 0] = expect_ctr[5, 1] = expect_ctr[6, 2] = 1
    assert np.array_equal(f_ctr, expect_ctr)
    f_tlg = loops.block("TL", "G")
    expect_tlg = np.zeros((6, 4))
    expect_tlg[0:3, 0] = 1
    expect_tlg[3:6, 1] = 1
    assert np.array_equal(f_tlg, expect_tlg)
    # junction loops never cross transformer windings
    assert np.array_equal(loops.block("TL", "J"), np.zeros((6, 2)))
    assert np.array_equal(loops.block("TL", "TR"), np.zeros((6, 3)))


def kirchhoff_consistency(netlist, mode):
    """Exact KCL/KVL for potential-generated voltages and random chord
    currents, independent of the loop-matrix construction."""
    g = build_graph(netlist)
    loops = loop_matrix(g, select_tree(g, mode))
    rng = np.random.default_rng(5)

    tree = [g.branch(nm) for _, nm in loops.row_labels]
    chord = [g.branch(nm) for _, nm in loops.col_labels]

    # KVL: branch voltages from node potentials (integers keep the
    # telescoping sums exact)
    pot = {node: float(rng.integers(-50, 51)) for node in g.nodes}
    v_tree = np.array([pot[b.node_from] - pot[b.node_to] for b in tree])
    v_chord = np.array([pot[b.node_from] - pot[b.node_to] for b in chord])
    assert np.abs(loops.matrix.T @ v_tree - v_chord).max() == 0.0

    # KCL: node balance of I_tr = -F I_ch
    i_chord = rng.integers(-5, 6, size=len(chord)).astype(float)
    i_tree = -loops.matrix @ i_chord
    balance = {node: 0.0 for node in g.nodes}
    for b, i in list(zip(tree, i_tree)) + list(zip(chord, i_chord)):
        balance[b.node_from] -= i
        balance[b.node_to] += i
    assert max(abs(v) for v in balance.values()) == 0.0


@pytest.mark.parametrize(
    "name,mode",
    [
        ("nr_blackbox_fig2", "bkd"),
        ("vd_gyrator", "bkd"),
        ("circulator_jj", "sdevice"),
    ],
)
def test_kirchhoff_consistency_fixtures(name, mode):
    kirchhoff_consistency(fixture(name), mode)


def test_kirchhoff_consistency_random(rng):
    from conftest import both_route_netlist

    for _ in range(10):
        n = both_route_netlist(rng)
        kirchhoff_consistency(n, "bkd")
        kirchhoff_consistency(n, "burkard")


def test_flux_attaches_to_chord_loop():
    text = "JJ j1 1 0 EJ=1e-24 CJ=1e-13\nFLUX ext 3e-15 through=(j1)\n"
    g = build_graph(parse_netlist(text))
    loops = loop_matrix(g, select_tree(g, "bkd"))
    j = loops.col_index("j1")
    assert loops.flux_offsets[j] == 3e-15


def test_flux_on_tree_branch_rejected():
    text = "JJ j1 1 0 EJ=1e-24 CJ=1e-13\nFLUX ext 3e-15 through=(j1_cj)\n"
    g = build_graph(parse_netlist(text))
    with pytest.raises(ModeViolationError):
        loop_matrix(g, select_tree(g, "bkd"))


def test_explicit_cap_parallel_to_shunt_is_a_capacitor_loop():
    # the junction already carries its shunt; adding another parallel
    # capacitor creates a capacitor-only loop, which is a hard error
    text = "C c1 1 0 1e-12\nJJ j1 1 0 EJ=1e-24 CJ=1e-13"
    with pytest.raises(InfeasibleTreeError):
        select_tree(build_graph(parse_netlist(text)), "bkd")


def test_loop_matrix_json_roundtrip():
    g = build_graph(circulator_jj(3))
    loops = loop_matrix(g, select_tree(g, "sdevice"))
    d = loops.to_json_dict()
    assert np.array_equal(np.array(d["matrix"]), loops.matrix)
    assert d["rows"][0]["class"] == "G"
