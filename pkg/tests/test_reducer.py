import numpy as np
import pytest

from conftest import plus_circulator, random_spd

from nrcirc import (
    Capacitor,
    Inductor,
    Netlist,
    NotOrthogonalError,
    SingularProjectionError,
    TransformerBank,
    TransformerLoopError,
    build_graph,
    circulator_spectrum,
    cyclic_circulator,
    eliminate_transformers,
    freeze_reduction,
    gyrator_scattering,
    immittance_convert,
    loop_matrix,
    nr_blackbox_fig2,
    real_basis,
    select_tree,
)
from nrcirc.reducer import combined_turns_matrix

SQ3 = np.sqrt(3.0)


# ------------------------------------------------------------- spectrum


def test_spectrum_three_port():
    spec = circulator_spectrum(cyclic_circulator(3).matrix)
    vals = sorted(spec.eigenvalues, key=lambda v: np.angle(v))
    expect = sorted([-1.0, -np.exp(2j * np.pi / 3), -np.exp(-2j * np.pi / 3)],
                    key=lambda v: np.angle(v))
    assert np.allclose(vals, expect, atol=1e-12)
    assert spec.minus_one_multiplicity == 1
    assert spec.plus_one_multiplicity == 0
    vm = [v for lam, v in spec.pairs() if abs(lam + 1) < 1e-9][0]
    assert np.allclose(np.real(vm), np.ones(3) / SQ3, atol=1e-12)


def test_spectrum_four_port():
    spec = circulator_spectrum(cyclic_circulator(4).matrix)
    angles = sorted(np.angle(spec.eigenvalues).round(9))
    assert np.allclose(angles, [-np.pi / 2, 0.0, np.pi / 2, np.pi], atol=1e-9)
    assert spec.minus_one_multiplicity == 1
    assert spec.plus_one_multiplicity == 1
    vm = [v for lam, v in spec.pairs() if abs(lam + 1) < 1e-9][0]
    assert np.allclose(np.real(vm), np.array([-1, 1, -1, 1]) / 2.0, atol=1e-12)


def test_spectrum_gyrator_has_no_unit_eigenvalues():
    spec = circulator_spectrum(gyrator_scattering().matrix)
    assert spec.minus_one_multiplicity == 0
    assert spec.plus_one_multiplicity == 0
    assert np.allclose(sorted(spec.eigenvalues.imag), [-1.0, 1.0], atol=1e-12)


def test_spectrum_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonalError):
        circulator_spectrum(np.array([[1.0, 0.3], [0.0, 1.0]]))


def test_eigenvalue_multiplicity_over_cyclic_family(rng):
    # -1 appears exactly once in the alternating-sign family for every n;
    # +1 appears exactly once iff n is even
    for n in range(2, 8):
        spec = circulator_spectrum(cyclic_circulator(n).matrix)
        assert spec.minus_one_multiplicity == 1
        assert spec.plus_one_multiplicity == (1 if n % 2 == 0 else 0)


# ------------------------------------------------------------ real basis


def test_real_basis_three_port_printed_matrix():
    m = real_basis(cyclic_circulator(3).matrix)
    expect = np.array(
        [
            [1 / SQ3, 1 / SQ3, 1 / SQ3],
            [-1 / np.sqrt(6), -1 / np.sqrt(6), np.sqrt(2.0 / 3.0)],
            [1 / np.sqrt(2), -1 / np.sqrt(2), 0.0],
        ]
    )
    assert np.abs(m - expect).max() < 1e-12


def test_real_basis_four_port_printed_matrix():
    m = real_basis(cyclic_circulator(4).matrix)
    s2 = np.sqrt(2.0)
    expect = np.array(
        [
            [-0.5, 0.5, -0.5, 0.5],
            [0.5, 0.5, 0.5, 0.5],
            [0.0, -1 / s2, 0.0, 1 / s2],
            [-1 / s2, 0.0, 1 / s2, 0.0],
        ]
    )
    assert np.abs(m - expect).max() < 1e-12


def test_real_basis_orthogonal(rng):
    from nrcirc import ideal_circulator

    for _ in range(20):
        n = int(rng.integers(2, 7))
        signs = rng.choice([-1.0, 1.0], size=n)
        m = real_basis(ideal_circulator(n, signs).matrix)
        assert np.abs(m @ m.T - np.eye(n)).max() < 1e-12


# ------------------------------------------------------ freeze reduction


def test_three_port_reduction_closed_forms():
    c = np.diag([1e-12, 2e-12, 3e-12])
    rec = freeze_reduction(cyclic_circulator(3).matrix, c, 50.0)
    c1, c2, c3 = 1e-12, 2e-12, 3e-12
    cq_expect = 0.5 * np.array(
        [
            [(c1 + c2 + 4 * c3) / 3.0, (c2 - c1) / SQ3],
            [(c2 - c1) / SQ3, c1 + c2],
        ]
    )
    assert np.abs(rec.c_reduced - cq_expect).max() < 1e-12 * np.abs(cq_expect).max()
    # dynamics-consistent reduced gyration; the reduced equations of
    # motion read C_Q f'' + grad U = -G_Q f'
    gq_expect = np.array([[0.0, -1.0], [1.0, 0.0]]) / (50.0 * SQ3)
    assert np.abs(rec.g_reduced - gq_expect).max() < 1e-12 / 50.0


def test_four_port_reduction_closed_forms():
    cvals = [1e-12, 2e-12, 3e-12, 4e-12]
    rec = freeze_reduction(cyclic_circulator(4).matrix, np.diag(cvals), 50.0)
    c1, c2, c3, c4 = cvals
    s2 = np.sqrt(2.0)
    cq_expect = np.array(
        [
            [(c1 + c2 + c3 + c4) / 4.0, (c4 - c2) / (2 * s2), (c3 - c1) / (2 * s2)],
            [(c4 - c2) / (2 * s2), (c2 + c4) / 2.0, 0.0],
            [(c3 - c1) / (2 * s2), 0.0, (c1 + c3) / 2.0],
        ]
    )
    assert np.abs(rec.c_reduced - cq_expect).max() < 1e-12 * np.abs(cq_expect).max()
    assert np.all(rec.g_reduced[0, :] == 0.0)
    assert np.all(rec.g_reduced[:, 0] == 0.0)
    gq_pair = np.array([[0.0, -1.0], [1.0, 0.0]]) / 50.0
    assert np.abs(rec.g_reduced[1:, 1:] - gq_pair).max() < 1e-12 / 50.0


def test_four_port_equal_c_identity():
    rec = freeze_reduction(cyclic_circulator(4).matrix, 2e-13 * np.eye(4), 50.0)
    assert np.abs(rec.c_reduced - 2e-13 * np.eye(3)).max() < 1e-25


def test_gyrator_identity_reduction_matches_admittance():
    d = gyrator_scattering(50.0)
    rec = freeze_reduction(d.matrix, 1e-12 * np.eye(2), 50.0)
    assert not rec.frozen
    assert np.array_equal(rec.basis, np.eye(2))
    y = immittance_convert(d, "Y").matrix
    assert np.abs(rec.g_reduced - y).max() < 1e-12 * np.abs(y).max()
    assert np.array_equal(rec.c_reduced, 1e-12 * np.eye(2))


def test_plus_circulator_identity_reduction_matches_admittance(rng):
    d = plus_circulator(3, 20.0)
    c = random_spd(rng, 3) * 1e-12
    rec = freeze_reduction(d.matrix, c, 20.0)
    assert not rec.frozen
    y = immittance_convert(d, "Y").matrix
    assert np.abs(rec.g_reduced - y).max() < 1e-12 * np.abs(y).max()


def test_projectors():
    rec = freeze_reduction(cyclic_circulator(3).matrix, np.eye(3) * 1e-12, 1.0)
    p, q = rec.projector_p, rec.projector_q
    s = rec.s
    assert np.abs(p @ p - p).max() < 1e-12
    assert np.abs(q @ q - q).max() < 1e-12
    assert np.abs(p + q - np.eye(3)).max() < 1e-12
    assert np.abs(p @ s + p).max() < 1e-12  # P S = -P
    assert np.abs(s @ p + p).max() < 1e-12  # S P = -P
    assert np.abs(p - np.ones((3, 3)) / 3.0).max() < 1e-12


def test_reduction_skew_and_multiplicty_guard():
    rec = freeze_reduction(cyclic_circulator(5).matrix, np.eye(5) * 1e-12, 7.0)
    g = rec.g_reduced
    assert np.abs(g + g.T).max() == 0.0
    # a -1 eigenvalue with multiplicity two leaves the projected block singular
    s = -np.eye(2)
    with pytest.raises(SingularProjectionError):
        freeze_reduction(s, np.eye(2) * 1e-12, 1.0)


def test_reduction_serialization():
    rec = freeze_reduction(cyclic_circulator(3).matrix, np.eye(3) * 1e-12, 50.0)
    d = rec.to_json_dict()
    assert d["frozen"] is True
    assert len(d["v_minus1"]) == 3


# ------------------------------------------------- transformer elimination


def test_fig2_effective_loops_printed_matrix():
    n = nr_blackbox_fig2()  # all turns 0.5 by default
    g = build_graph(n)
    loops = loop_matrix(g, select_tree(g, "bkd"))
    eff = eliminate_transformers(loops, combined_turns_matrix(n, loops))
    expect = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.5, 1.0, 0.0],
            [0.5, 0.5, 0.0, 1.0],
            [0.5, 0.5, 0.0, 0.0],
        ]
    )
    assert np.abs(eff.block("C", "G") - expect).max() < 1e-12
    assert np.abs(eff.block("C", "L") - np.array([[0, 0, 0, 0, 0, 0, 1.0]]).T).max() == 0


def test_zero_turns_leaves_blocks_unchanged():
    n = nr_blackbox_fig2(n11l=1e-30, n12l=1e-30, n11r=1e-30, n12r=1e-30,
                         n21=1e-30, n22=1e-30)
    g = build_graph(n)
    loops = loop_matrix(g, select_tree(g, "bkd"))
    turns = np.zeros_like(combined_turns_matrix(n, loops))
    eff = eliminate_transformers(loops, turns)
    assert np.array_equal(eff.block("C", "G"), loops.block("C", "G").astype(float))
    assert np.array_equal(eff.block("C", "J"), loops.block("C", "J").astype(float))


def test_transformer_loop_detected():
    # a right winding directly shunting a left winding
    elements = (
        Capacitor("c1", "a", "0", 1e-12),
        Inductor("l2", "b", "0", 1e-9),
        TransformerBank("t1", (("a", "b"),), (("a", "b"),), np.array([[0.5]])),
    )
    n = Netlist(elements)
    g = build_graph(n)
    loops = loop_matrix(g, select_tree(g, "bkd"))
    assert np.any(loops.block("TL", "TR") != 0)
    with pytest.raises(TransformerLoopError):
        eliminate_transformers(loops, combined_turns_matrix(n, loops))


def test_elimination_matches_full_system_oracle(rng):
    """Brute-force check on the reference circuit: eliminated Kirchhoff
    relations reproduce the full-system ones for random assignments."""
    n = nr_blackbox_fig2(
        n11l=0.37, n12l=-0.81, n11r=1.21, n12r=0.44, n21=-0.66, n22=0.93
    )
    g = build_graph(n)
    loops = loop_matrix(g, select_tree(g, "bkd"))
    turns = combined_turns_matrix(n, loops)
    eff = eliminate_transformers(loops, turns)

    f = loops.matrix.astype(float)
    rows_c, rows_tl = loops.rows_of("C"), loops.rows_of("TL")
    cols_tr = loops.cols_of("TR")
    cols_keep = [j for j in range(f.shape[1]) if j not in cols_tr]

    for _ in range(10):
        # currents: pick chord currents, close the transformer through the
        # Belevitch constraint, then compare the tree-capacitor currents
        i_keep = rng.standard_normal(len(cols_keep))
        i_tl = -(f[np.ix_(rows_tl, cols_keep)] @ i_keep)  # KCL on left windings
        i_tr_w = -turns @ i_tl
        i_full = np.zeros(f.shape[1])
        i_full[cols_keep] = i_keep
        i_full[cols_tr] = i_tr_w
        i_tree_full = -(f[rows_c, :] @ i_full)
        i_tree_eff = -(eff.matrix @ i_keep)
        assert np.abs(i_tree_full - i_tree_eff).max() < 1e-12 * max(
            1.0, np.abs(i_tree_full).max()
        )

        # voltages: tree capacitor voltages propagate through the windings
        v_c = rng.standard_normal(len(rows_c))
        v_tr_w = f[np.ix_(rows_c, cols_tr)].T @ v_c
        v_tl = turns.T @ v_tr_w
        v_keep_full = (
            f[np.ix_(rows_c, cols_keep)].T @ v_c
            + f[np.ix_(rows_tl, cols_keep)].T @ v_tl
        )
        v_keep_eff = eff.matrix.T @ v_c
        assert np.abs(v_keep_full - v_keep_eff).max() < 1e-12 * max(
            1.0, np.abs(v_keep_full).max()
        )
