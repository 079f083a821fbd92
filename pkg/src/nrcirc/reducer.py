"""Transformer elimination and frozen-variable reduction.

Two independent jobs live here.  ``eliminate_transformers`` folds ideal
multiport transformer branches into effective (real-valued) loop
submatrices

    F_XY^eff = F_XY + F_{X,TR} N F_{TL,Y}

valid when no left (tree) winding is shunted by a right (chord) one.

``freeze_reduction`` handles nonreciprocal devices that only have a
scattering description.  When S has the eigenvalue -1, the flux
combination along its eigenvector v is frozen (its velocity vanishes
along every trajectory) and must be removed before a Legendre transform
exists.  In the real orthonormal basis M = [v_-1, w_1, ..., w_{N-1}]
the dynamical block carries the reduced capacitance (C_Q)_ml =
w_m^T C w_l and the reduced gyration matrix

    G_Q = R^-1 [w^T (1+S) w]^-1 [w^T (1-S) w],

the Cayley transform of an orthogonal matrix restricted to the
dynamical subspace, hence skew-symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegeneratePairError,
    NotOrthogonalError,
    NotPositiveDefiniteError,
    SingularProjectionError,
    TransformerLoopError,
)
from .graph import CLASS_ORDER, LoopMatrix
from .immittance import EIGENVALUE_TOL, ORTHOGONALITY_TOL

#: asymmetry allowed in a computed gyration matrix before symmetrizing
SKEW_ASSERT_TOL = 1e-10

_COMPONENT_TOL = 1e-9


@dataclass(frozen=True)
class EffectiveLoops:
    """Loop matrix after transformer elimination; entries are real."""

    matrix: np.ndarray
    row_labels: tuple  # (class, name), transformer rows removed
    col_labels: tuple
    flux_offsets: np.ndarray
    turns: np.ndarray  # the applied turns-ratio matrix

    def rows_of(self, cls: str) -> list[int]:
        return [i for i, (c, _) in enumerate(self.row_labels) if c == cls]

    def cols_of(self, cls: str) -> list[int]:
        return [j for j, (c, _) in enumerate(self.col_labels) if c == cls]

    def block(self, row_class: str, col_class: str) -> np.ndarray:
        return self.matrix[np.ix_(self.rows_of(row_class), self.cols_of(col_class))]

    def row_names(self, cls: str | None = None) -> list[str]:
        return [n for c, n in self.row_labels if cls is None or c == cls]

    def col_names(self, cls: str | None = None) -> list[str]:
        return [n for c, n in self.col_labels if cls is None or c == cls]


def eliminate_transformers(loops: LoopMatrix, turns: np.ndarray) -> EffectiveLoops:
    """Remove transformer rows/columns from a loop matrix.

    ``turns`` is the combined turns-ratio matrix N, shaped
    (right branches x left branches) in the loop matrix's own TR column
    and TL row ordering; I_R = -N I_L.
    """
    turns = np.atleast_2d(np.asarray(turns, dtype=float))
    tl_rows = loops.rows_of("TL")
    tr_cols = loops.cols_of("TR")
    if turns.shape != (len(tr_cols), len(tl_rows)):
        if not (turns.size == 0 and not tl_rows and not tr_cols):
            raise TransformerLoopError(
                f"turns matrix is {turns.shape}, expected "
                f"({len(tr_cols)}, {len(tl_rows)})"
            )

    keep_rows = [i for i, (c, _) in enumerate(loops.row_labels) if c != "TL"]
    keep_cols = [j for j, (c, _) in enumerate(loops.col_labels) if c != "TR"]

    f = loops.matrix.astype(float)
    if tl_rows and tr_cols:
        f_tltr = f[np.ix_(tl_rows, tr_cols)]
        if np.any(f_tltr != 0):
            raise TransformerLoopError(
                "left transformer branches are shunted by right ones "
                "(F_{T^tr T^ch} != 0); elimination is not defined"
            )
        correction = f[:, tr_cols] @ turns @ f[tl_rows, :]
        eff = f + correction
    else:
        eff = f

    return EffectiveLoops(
        eff[np.ix_(keep_rows, keep_cols)],
        tuple(loops.row_labels[i] for i in keep_rows),
        tuple(loops.col_labels[j] for j in keep_cols),
        loops.flux_offsets[keep_cols],
        turns,
    )


# ----------------------------------------------------- spectrum and basis


def _check_orthogonal(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NotOrthogonalError(f"S must be square, got shape {s.shape}")
    defect = np.abs(s.T @ s - np.eye(s.shape[0])).max()
    if defect > max(ORTHOGONALITY_TOL, 1e-12):
        raise NotOrthogonalError(f"S is not orthogonal: |S^T S - 1| = {defect:.3e}")
    return s


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a unit eigenvector so its last nonzero component is real > 0."""
    idx = np.nonzero(np.abs(v) > _COMPONENT_TOL * np.abs(v).max())[0]
    pivot = v[idx[-1]]
    return v * (pivot.conjugate() / abs(pivot))


@dataclass(frozen=True)
class CirculatorSpectrum:
    eigenvalues: np.ndarray  # sorted by |arg| then sign, pairs adjacent
    eigenvectors: np.ndarray  # columns, phase-fixed
    plus_one_multiplicity: int
    minus_one_multiplicity: int

    @property
    def has_admittance(self) -> bool:
        return self.minus_one_multiplicity == 0

    @property
    def has_impedance(self) -> bool:
        return self.plus_one_multiplicity == 0

    def pairs(self) -> list:
        return list(zip(self.eigenvalues, self.eigenvectors.T))


def circulator_spectrum(s: np.ndarray) -> CirculatorSpectrum:
    """Eigen-decomposition of an orthogonal scattering matrix.

    Eigenvalues lie on the unit circle; +-1 occurrences are counted and
    complex eigenvalues are arranged so each conjugate pair is adjacent
    with the positive-argument member first.
    """
    s = _check_orthogonal(s)
    vals, vecs = np.linalg.eig(s)

    order = sorted(
        range(len(vals)),
        key=lambda i: (round(abs(np.angle(vals[i])), 12), -np.sign(np.angle(vals[i]))),
    )
    vals = vals[order]
    vecs = vecs[:, order]
    vecs = np.column_stack([_fix_phase(vecs[:, i]) for i in range(vecs.shape[1])])

    plus = int(np.sum(np.abs(vals - 1.0) < EIGENVALUE_TOL))
    minus = int(np.sum(np.abs(vals + 1.0) < EIGENVALUE_TOL))
    return CirculatorSpectrum(vals, vecs, plus, minus)


def real_basis(s: np.ndarray) -> np.ndarray:
    """Real orthonormal basis adapted to S, one vector per row.

    Row order: the -1 eigenvector (if present), the +1 eigenvector (if
    present), then for each conjugate pair, taken by ascending argument
    in (0, pi), the normalized real part followed by the normalized
    imaginary part.  Phases are fixed so each eigenvector's last nonzero
    component is real positive, which makes the construction
    reproducible.
    """
    spec = circulator_spectrum(s)
    n = s.shape[0]
    rows: list[np.ndarray] = []

    for val, vec in spec.pairs():
        if abs(val + 1.0) < EIGENVALUE_TOL:
            rows.insert(0, np.real(vec))

    plus_rows = [
        np.real(vec) for val, vec in spec.pairs() if abs(val - 1.0) < EIGENVALUE_TOL
    ]
    rows.extend(plus_rows)

    complex_pairs = [
        (np.angle(val), vec)
        for val, vec in spec.pairs()
        if EIGENVALUE_TOL < np.angle(val) < np.pi - EIGENVALUE_TOL
    ]
    complex_pairs.sort(key=lambda t: t[0])
    for _, vec in complex_pairs:
        re, im = np.real(vec), np.imag(vec)
        nre, nim = np.linalg.norm(re), np.linalg.norm(im)
        if nre < _COMPONENT_TOL or nim < _COMPONENT_TOL:
            raise DegeneratePairError(
                "complex eigenvector has a vanishing real or imaginary part"
            )
        rows.append(re / nre)
        rows.append(im / nim)

    m = np.vstack(rows)
    if m.shape != (n, n):
        raise DegeneratePairError(
            f"basis construction produced {m.shape[0]} rows for dimension {n}"
        )
    if np.abs(m @ m.T - np.eye(n)).max() > 1e-10:
        raise DegeneratePairError("constructed basis is not orthonormal")
    return m


# ------------------------------------------------------- frozen reduction


@dataclass(frozen=True)
class ReductionRecord:
    """Outcome of removing the frozen flux of an S-described device."""

    s: np.ndarray
    r_ref: float
    v_minus1: np.ndarray | None
    projector_p: np.ndarray
    projector_q: np.ndarray
    basis: np.ndarray  # rows: v_-1 (if frozen) then the dynamical w_n
    alpha: float  # frozen flux offset, Wb
    c_reduced: np.ndarray
    g_reduced: np.ndarray

    @property
    def frozen(self) -> bool:
        return self.v_minus1 is not None

    @property
    def dynamical_basis(self) -> np.ndarray:
        """Rows w_n spanning the dynamical subspace."""
        return self.basis[1:] if self.frozen else self.basis

    def to_json_dict(self) -> dict:
        return {
            "frozen": self.frozen,
            "v_minus1": None if self.v_minus1 is None else list(map(float, self.v_minus1)),
            "alpha_wb": float(self.alpha),
            "basis": self.basis.tolist(),
            "projector_p": self.projector_p.tolist(),
            "projector_q": self.projector_q.tolist(),
            "c_reduced_f": self.c_reduced.tolist(),
            "g_reduced_inv_ohm": self.g_reduced.tolist(),
        }


def _skew_part(a: np.ndarray, what: str) -> np.ndarray:
    asym = np.abs(a + a.T).max()
    scale = max(1.0, np.abs(a).max())
    if asym > SKEW_ASSERT_TOL * scale:
        raise SingularProjectionError(
            f"{what} came out non-skew-symmetric (defect {asym:.3e}); "
            "the device description is malformed"
        )
    return 0.5 * (a - a.T)


def freeze_reduction(
    s: np.ndarray, c: np.ndarray, r: float, alpha: float = 0.0
) -> ReductionRecord:
    """Reduce an S-described device's port space to dynamical variables.

    When S has no -1 eigenvalue the record is the identity reduction:
    the basis is the identity, C_Q = C and G_Q is the device admittance
    R^-1 (1+S)^-1 (1-S) in the original port basis.
    """
    s = _check_orthogonal(s)
    c = np.asarray(c, dtype=float)
    n = s.shape[0]
    if c.shape != (n, n):
        raise NotPositiveDefiniteError(f"capacitance matrix shape {c.shape} != ({n},{n})")
    if np.abs(c - c.T).max() > 1e-9 * max(1.0, np.abs(c).max()):
        raise NotPositiveDefiniteError("capacitance matrix is not symmetric")
    if np.linalg.eigvalsh(c).min() <= 0:
        raise NotPositiveDefiniteError("capacitance matrix is not positive definite")

    spec = circulator_spectrum(s)
    if spec.minus_one_multiplicity > 1:
        raise SingularProjectionError(
            "-1 eigenvalue has multiplicity "
            f"{spec.minus_one_multiplicity}; the reduced (1+S) block stays singular"
        )

    if spec.minus_one_multiplicity == 0:
        identity = np.eye(n)
        g_full = np.linalg.solve(identity + s, identity - s) / r
        return ReductionRecord(
            s=s,
            r_ref=r,
            v_minus1=None,
            projector_p=np.zeros((n, n)),
            projector_q=identity.copy(),
            basis=identity,
            alpha=alpha,
            c_reduced=c.copy(),
            g_reduced=_skew_part(g_full, "admittance"),
        )

    m = real_basis(s)
    v = m[0]
    w = m[1:]

    p = np.outer(v, v)
    q = np.eye(n) - p

    b = w @ (np.eye(n) + s) @ w.T
    if abs(np.linalg.det(b)) < 1e-12:
        raise SingularProjectionError("projected (1+S) block is singular")
    a = w @ (np.eye(n) - s) @ w.T
    if spec.plus_one_multiplicity == 1:
        # (1-S) annihilates the +1 eigenvector, which real_basis places
        # first among the w rows; its gyration row/column is identically
        # zero, so the rounding noise from the eigensolver is removed.
        a[0, :] = 0.0
        a[:, 0] = 0.0
    g_reduced = _skew_part(np.linalg.solve(b, a) / r, "reduced gyration matrix")
    if spec.plus_one_multiplicity == 1:
        g_reduced[0, :] = 0.0
        g_reduced[:, 0] = 0.0

    return ReductionRecord(
        s=s,
        r_ref=r,
        v_minus1=v,
        projector_p=p,
        projector_q=q,
        basis=m,
        alpha=alpha,
        c_reduced=w @ c @ w.T,
        g_reduced=g_reduced,
    )


def combined_turns_matrix(netlist, loops: LoopMatrix) -> np.ndarray:
    """Assemble the turns matrices of all banks in loop-matrix ordering."""
    from .netlist import TransformerBank

    tl_names = loops.row_names("TL")
    tr_names = loops.col_names("TR")
    turns = np.zeros((len(tr_names), len(tl_names)))
    tl_pos = {name: i for i, name in enumerate(tl_names)}
    tr_pos = {name: i for i, name in enumerate(tr_names)}
    for bank in netlist.of_type(TransformerBank):
        for i in range(len(bank.right)):
            for j in range(len(bank.left)):
                turns[tr_pos[bank.right_name(i)], tl_pos[bank.left_name(j)]] = bank.turns[i, j]
    return turns
