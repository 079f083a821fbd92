import numpy as np
import pytest

from nrcirc import (
    BadSignError,
    ImmittanceDescription,
    InvalidImmittanceError,
    NoAdmittanceError,
    NoImpedanceError,
    SingularMatrixError,
    cyclic_circulator,
    gyrator_scattering,
    ideal_circulator,
    immittance_convert,
)


def test_gyrator_admittance():
    y = immittance_convert(gyrator_scattering(2.0), "Y")
    assert np.allclose(y.matrix, 0.5 * np.array([[0, 1], [-1, 0]]), atol=1e-15)


def test_gyrator_specialization_signs():
    d = ideal_circulator(2, [1.0, -1.0])
    assert np.array_equal(d.matrix, np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_cyclic_family_matches_sign_convention():
    s3 = cyclic_circulator(3).matrix
    expect = -np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    assert np.array_equal(s3, expect)
    s4 = cyclic_circulator(4).matrix
    assert s4[0, 3] == 1.0 and s4[1, 0] == 1.0


def test_cyclic_no_admittance():
    with pytest.raises(NoAdmittanceError):
        immittance_convert(cyclic_circulator(3), "Y")
    with pytest.raises(NoAdmittanceError):
        immittance_convert(cyclic_circulator(4), "Y")


def test_identity_has_no_impedance():
    for n in (2, 3, 5):
        d = ImmittanceDescription("S", np.eye(n), 1.0)
        with pytest.raises(NoImpedanceError):
            immittance_convert(d, "Z")


def test_even_cyclic_has_no_impedance():
    with pytest.raises(NoImpedanceError):
        immittance_convert(cyclic_circulator(4), "Z")


def test_bad_signs():
    with pytest.raises(BadSignError):
        ideal_circulator(3, [1.0, 2.0, 1.0])
    with pytest.raises(BadSignError):
        ideal_circulator(3, [1.0, 1.0])


def test_s_must_be_orthogonal():
    with pytest.raises(InvalidImmittanceError):
        ImmittanceDescription("S", np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)


def test_y_must_be_skew():
    with pytest.raises(InvalidImmittanceError):
        ImmittanceDescription("Y", np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0)


def test_singular_y_to_z():
    # 3x3 skew matrices are always singular
    y = ImmittanceDescription("Y", np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0.0]]), 1.0)
    with pytest.raises(SingularMatrixError):
        immittance_convert(y, "Z")


@pytest.mark.parametrize("n,signs", [(2, [1, -1]), (3, [1, 1, 1]), (4, [-1, 1, 1, 1])])
def test_roundtrip_involution(n, signs):
    d = ideal_circulator(n, signs)
    d = ImmittanceDescription("S", d.matrix, 37.0)
    for target in ("Y", "Z"):
        try:
            mid = immittance_convert(d, target)
        except (NoAdmittanceError, NoImpedanceError):
            continue
        back = immittance_convert(mid, "S")
        assert np.abs(back.matrix - d.matrix).max() < 1e-12
        assert np.abs(mid.matrix + mid.matrix.T).max() < 1e-12 * max(
            1.0, np.abs(mid.matrix).max()
        )


def test_y_z_inverses():
    d = ImmittanceDescription("S", gyrator_scattering().matrix, 5.0)
    y = immittance_convert(d, "Y")
    z = immittance_convert(d, "Z")
    assert np.allclose(y.matrix @ z.matrix, np.eye(2), atol=1e-14)


def test_orthogonality_of_generated_scattering(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        signs = rng.choice([-1.0, 1.0], size=n)
        s = ideal_circulator(n, signs).matrix
        assert np.abs(s.T @ s - np.eye(n)).max() < 1e-12
