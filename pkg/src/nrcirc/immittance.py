"""Immittance descriptions of ideal nonreciprocal multiports.

An ideal lossless frequency-independent N-port is described by an
orthogonal scattering matrix S (with reference resistance R), or, when
they exist, by the skew-symmetric Cayley transforms

    Y = R^-1 (1 + S)^-1 (1 - S),        Z = R (1 - S)^-1 (1 + S).

Y does not exist when S has a -1 eigenvalue, Z when S has a +1
eigenvalue; those corner cases are exactly what the reduction machinery
in :mod:`nrcirc.reducer` is for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadSignError,
    InvalidImmittanceError,
    NoAdmittanceError,
    NoImpedanceError,
    SingularMatrixError,
)

#: |S^T S - 1| tolerance for accepting an orthogonal scattering matrix.
ORTHOGONALITY_TOL = 1e-12

#: |Y + Y^T| tolerance for accepting a skew-symmetric Y or Z matrix.
SKEW_TOL = 1e-12

#: |lambda -+ 1| tolerance when testing S for +-1 eigenvalues.
EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class ImmittanceDescription:
    """One of the S / Y / Z descriptions of a linear N-port.

    ``r_ref`` is the port reference resistance; it defines the Cayley
    transform for ``kind='S'`` and is carried through conversions so a
    Y or Z description can be mapped back to scattering form.
    """

    kind: str
    matrix: np.ndarray
    r_ref: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if self.kind not in ("S", "Y", "Z"):
            raise InvalidImmittanceError(f"unknown immittance kind {self.kind!r}")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidImmittanceError(f"immittance matrix must be square, got {m.shape}")
        if self.r_ref <= 0:
            raise InvalidImmittanceError("reference resistance must be positive")
        if self.kind == "S":
            defect = np.abs(m.T @ m - np.eye(m.shape[0])).max()
            if defect > ORTHOGONALITY_TOL:
                raise InvalidImmittanceError(
                    f"S matrix not orthogonal: |S^T S - 1| = {defect:.3e}"
                )
        else:
            defect = np.abs(m + m.T).max()
            scale = max(1.0, np.abs(m).max())
            if defect > SKEW_TOL * scale:
                raise InvalidImmittanceError(
                    f"{self.kind} matrix not skew-symmetric: |A + A^T| = {defect:.3e}"
                )

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImmittanceDescription):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.r_ref == other.r_ref
            and self.matrix.shape == other.matrix.shape
            and np.array_equal(self.matrix, other.matrix)
        )


def _has_eigenvalue(s: np.ndarray, value: float) -> bool:
    eigs = np.linalg.eigvals(s)
    return bool(np.any(np.abs(eigs - value) < EIGENVALUE_TOL))


def scattering_has_admittance(s: np.ndarray) -> bool:
    """True when (1+S) is invertible, i.e. S has no -1 eigenvalue."""
    return not _has_eigenvalue(np.asarray(s, dtype=float), -1.0)


def scattering_has_impedance(s: np.ndarray) -> bool:
    """True when (1-S) is invertible, i.e. S has no +1 eigenvalue."""
    return not _has_eigenvalue(np.asarray(s, dtype=float), 1.0)


def _s_to_y(s: np.ndarray, r: float) -> np.ndarray:
    if _has_eigenvalue(s, -1.0):
        raise NoAdmittanceError("S has a -1 eigenvalue; admittance does not exist")
    n = s.shape[0]
    y = np.linalg.solve(np.eye(n) + s, np.eye(n) - s) / r
    return 0.5 * (y - y.T)


def _s_to_z(s: np.ndarray, r: float) -> np.ndarray:
    if _has_eigenvalue(s, 1.0):
        raise NoImpedanceError("S has a +1 eigenvalue; impedance does not exist")
    n = s.shape[0]
    z = r * np.linalg.solve(np.eye(n) - s, np.eye(n) + s)
    return 0.5 * (z - z.T)


def _cayley_to_s(a: np.ndarray) -> np.ndarray:
    # inverse of a = (1+S)^-1 (1-S):  S = (1-a)(1+a)^-1, always defined for skew a
    n = a.shape[0]
    return np.linalg.solve((np.eye(n) + a).T, (np.eye(n) - a).T).T


def immittance_convert(
    d: ImmittanceDescription, target: str, r_ref: float | None = None
) -> ImmittanceDescription:
    """Convert between S, Y and Z descriptions of the same device.

    ``r_ref`` overrides the reference resistance used for conversions
    involving S; by default the one stored on ``d`` is used.

    Raises
    ------
    NoAdmittanceError / NoImpedanceError
        When the requested description does not exist for this device.
    SingularMatrixError
        When inverting Y <-> Z fails.
    """
    r = d.r_ref if r_ref is None else r_ref
    if target not in ("S", "Y", "Z"):
        raise InvalidImmittanceError(f"unknown target kind {target!r}")
    if target == d.kind:
        return ImmittanceDescription(d.kind, d.matrix.copy(), r)

    m = d.matrix
    if d.kind == "S":
        if target == "Y":
            return ImmittanceDescription("Y", _s_to_y(m, r), r)
        return ImmittanceDescription("Z", _s_to_z(m, r), r)

    if d.kind == "Y":
        if target == "Z":
            try:
                z = np.linalg.inv(m)
            except np.linalg.LinAlgError as err:
                raise SingularMatrixError("Y is singular; Z does not exist") from err
            return ImmittanceDescription("Z", 0.5 * (z - z.T), r)
        # Y -> S:  S = (1 - R Y)(1 + R Y)^-1
        return ImmittanceDescription("S", _cayley_to_s(r * m), r)

    # d.kind == "Z"
    if target == "Y":
        try:
            y = np.linalg.inv(m)
        except np.linalg.LinAlgError as err:
            raise SingularMatrixError("Z is singular; Y does not exist") from err
        return ImmittanceDescription("Y", 0.5 * (y - y.T), r)
    # Z -> S:  with W = Z/R,  S = (W - 1)(W + 1)^-1 = -(1 - W)(1 + W)^-1
    return ImmittanceDescription("S", -_cayley_to_s(m / r), r)


def ideal_circulator(n: int, signs) -> ImmittanceDescription:
    """Scattering matrix of an ideal n-port circulator.

    The matrix is the cyclic pattern S[(k+1) mod n, k] = signs[k]; every
    sign must be +-1, which makes S orthogonal by construction.
    """
    signs = list(signs)
    if n < 2:
        raise BadSignError("a circulator needs at least 2 ports")
    if len(signs) != n:
        raise BadSignError(f"expected {n} signs, got {len(signs)}")
    s = np.zeros((n, n))
    for k, sign in enumerate(signs):
        if sign not in (1, -1, 1.0, -1.0):
            raise BadSignError(f"sign {sign!r} is not +-1")
        s[(k + 1) % n, k] = float(sign)
    return ImmittanceDescription("S", s, 1.0)


def cyclic_circulator(n: int, r_ref: float = 1.0) -> ImmittanceDescription:
    """The (-1)^n-signed cyclic n-port circulator.

    This family has a -1 eigenvalue for every n (no admittance
    description) and additionally a +1 eigenvalue for even n (no
    impedance description either).
    """
    d = ideal_circulator(n, [(-1.0) ** n] * n)
    return ImmittanceDescription("S", d.matrix, r_ref)


def gyrator_scattering(r_ref: float = 1.0) -> ImmittanceDescription:
    """2-port gyrator S = [[0,-1],[1,0]]; admittance (1/R)[[0,1],[-1,0]]."""
    d = ideal_circulator(2, [1.0, -1.0])
    return ImmittanceDescription("S", d.matrix, r_ref)
