"""Normal-mode analysis of the harmonic sector.

The canonical rescaling Q = C^{1/2} O^T q, Phi = C^{-1/2} O^T f turns
the quadratic Hamiltonian into

    H = 1/2 (q^T, f^T) [[1, Gamma], [Gamma^T, Omega^2]] (q; f)

with Gamma = -1/2 O C^{-1/2} G C^{-1/2} O^T and Omega^2 diagonal, O
being chosen to diagonalize C^{-1/2} M C^{-1/2} - Gamma~^2.  The block
matrix H_h, when positive definite, is brought to diag(Lambda, Lambda)
by a real symplectic congruence built from the eigenvectors of H_h J;
the Lambda entries are the normal-mode angular frequencies.

Zero-frequency (free-particle) sectors, which arise when the inductive
matrix is singular in a way the gyration coupling does not lift, make
H_h semidefinite; they are detected and reported separately because the
symplectic normal form requires strict definiteness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import (
    NotPositiveDefiniteError,
    PairingFailureError,
    SingularKineticError,
)
from .hamiltonian import QuadraticFluxHamiltonian

_EIG_TOL = 1e-10


def _symplectic_form(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


@dataclass(frozen=True)
class HarmonicBlock:
    """Harmonic sector in canonically rescaled coordinates.

    ``h_matrix`` is in SI (rad/s based) units, which mixes O(1) and
    O(omega^2) entries; ``omega_scale`` is the characteristic frequency
    used to balance it before eigenanalysis.
    """

    h_matrix: np.ndarray  # 2n x 2n, [[1, Gamma],[Gamma^T, Omega^2]]
    gamma: np.ndarray
    omega2: np.ndarray  # diagonal matrix
    rotation: np.ndarray  # O
    c_sqrt: np.ndarray
    c_inv_sqrt: np.ndarray
    omega_scale: float

    @property
    def n_modes(self) -> int:
        return self.gamma.shape[0]

    def balanced(self) -> np.ndarray:
        """O(1)-conditioned Hamiltonian matrix T^T H_h T / omega_scale.

        T = diag(sqrt(w0) 1, 1/sqrt(w0) 1) is symplectic, so the
        symplectic eigenvalues of the result are the physical ones
        divided by omega_scale.
        """
        n = self.n_modes
        w0 = self.omega_scale
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = np.eye(n)
        out[:n, n:] = self.gamma / w0
        out[n:, :n] = self.gamma.T / w0
        out[n:, n:] = self.omega2 / w0**2
        return out

    def flux_from_scaled(self) -> np.ndarray:
        """Matrix mapping f-coordinates to physical coordinates."""
        return self.c_inv_sqrt @ self.rotation.T

    def momentum_from_scaled(self) -> np.ndarray:
        return self.c_sqrt @ self.rotation.T


@dataclass(frozen=True)
class NormalModes:
    lambdas: np.ndarray  # ascending, rad/s
    s_symp: np.ndarray  # 2n x 2n real symplectic
    block: HarmonicBlock | None = None

    @property
    def n_modes(self) -> int:
        return self.lambdas.shape[0]


@dataclass(frozen=True)
class ModeReport:
    frequencies: np.ndarray  # nonzero modes, rad/s ascending
    free_modes: int
    modes: NormalModes | None  # None when the harmonic block is singular
    block: HarmonicBlock


def _matrix_sqrt_spd(a: np.ndarray):
    w, v = np.linalg.eigh(a)
    if w.min() <= 0:
        raise SingularKineticError("kinetic matrix is not positive definite")
    return v @ np.diag(np.sqrt(w)) @ v.T, v @ np.diag(1.0 / np.sqrt(w)) @ v.T


def normal_coordinates(h: QuadraticFluxHamiltonian) -> HarmonicBlock:
    """Rescale and rotate so the Hamiltonian matrix is [[1,G],[G^T,O^2]].

    The cosine potential is linearized at the origin; its curvature
    joins the inductive matrix.
    """
    c_sqrt, c_inv_sqrt = _matrix_sqrt_spd(h.kinetic)
    m_eff = h.harmonic_inductive()

    gamma_tilde = -0.5 * c_inv_sqrt @ h.gyration @ c_inv_sqrt
    gamma_tilde = 0.5 * (gamma_tilde - gamma_tilde.T)
    a = c_inv_sqrt @ m_eff @ c_inv_sqrt - gamma_tilde @ gamma_tilde
    a = 0.5 * (a + a.T)

    w, vecs = np.linalg.eigh(a)
    rotation = vecs.T  # rows: O such that O a O^T diagonal
    omega2 = np.diag(w)
    gamma = rotation @ gamma_tilde @ rotation.T
    gamma = 0.5 * (gamma - gamma.T)

    n = gamma.shape[0]
    h_matrix = np.zeros((2 * n, 2 * n))
    h_matrix[:n, :n] = np.eye(n)
    h_matrix[:n, n:] = gamma
    h_matrix[n:, :n] = gamma.T
    h_matrix[n:, n:] = omega2
    omega_scale = max(
        np.sqrt(np.abs(w).max()) if w.size else 0.0,
        np.abs(gamma).max() if gamma.size else 0.0,
    )
    if omega_scale <= 0.0:
        omega_scale = 1.0
    return HarmonicBlock(h_matrix, gamma, omega2, rotation, c_sqrt, c_inv_sqrt, omega_scale)


def williamson(block_or_matrix) -> NormalModes:
    """Symplectic normal form of a positive definite Hamiltonian matrix.

    Returns Lambda ascending and a real S with S^T J S = J and
    S^T H_h S = diag(Lambda, Lambda).  S is built as (F^dag)^-1 V D^{1/2}
    from eigenvectors of H_h J normalized by F F^dag = H_h, with the
    pairwise unitary V = [[1, i], [1, -i]]/sqrt(2).
    """
    if isinstance(block_or_matrix, HarmonicBlock):
        block = block_or_matrix
        h_h = block.balanced()
        unscale = block.omega_scale
    else:
        h_h = np.asarray(block_or_matrix, dtype=float)
        block = None
        unscale = 1.0

    m2 = h_h.shape[0]
    if m2 % 2 or np.abs(h_h - h_h.T).max() > 1e-10 * max(1.0, np.abs(h_h).max()):
        raise NotPositiveDefiniteError("H_h must be symmetric with even dimension")
    n = m2 // 2
    scale = np.abs(h_h).max()
    evals = np.linalg.eigvalsh(h_h)
    if evals.min() <= _EIG_TOL * scale:
        raise NotPositiveDefiniteError(
            f"H_h has eigenvalue {evals.min():.3e}; free modes must be split off first"
        )

    w, e = np.linalg.eigh(h_h)
    h_sqrt = e @ np.diag(np.sqrt(w)) @ e.T
    j = _symplectic_form(n)

    skew = h_sqrt @ j @ h_sqrt
    skew = 0.5 * (skew - skew.T)
    t, q = schur(skew, output="real")

    lams = np.empty(n)
    u = np.zeros((m2, n), dtype=complex)
    idx = 0
    col = 0
    while idx < m2:
        if idx + 1 >= m2 or abs(t[idx, idx + 1]) <= _EIG_TOL * scale:
            raise PairingFailureError(
                "eigenvalues of H_h J did not form conjugate imaginary pairs"
            )
        b = t[idx, idx + 1]
        q1, q2 = q[:, idx], q[:, idx + 1]
        if b < 0:
            b = -b
            q1, q2 = q2, q1
        # eigenvector of the skew matrix for -i*b; this orientation makes
        # the final transformation symplectic rather than anti-symplectic
        u[:, col] = (q1 - 1j * q2) / np.sqrt(2.0)
        lams[col] = b
        idx += 2
        col += 1

    order = np.argsort(lams)
    lams = lams[order]
    u = u[:, order]

    f = h_sqrt @ np.hstack([u, u.conj()])  # F F^dag = H_h
    v_big = np.zeros((m2, m2), dtype=complex)
    v_big[:n, :n] = np.eye(n)
    v_big[:n, n:] = 1j * np.eye(n)
    v_big[n:, :n] = np.eye(n)
    v_big[n:, n:] = -1j * np.eye(n)
    v_big /= np.sqrt(2.0)

    d_sqrt = np.diag(np.sqrt(np.concatenate([lams, lams])))
    s = np.linalg.solve(f.conj().T, v_big @ d_sqrt)
    if np.abs(s.imag).max() > 1e-8 * max(1.0, np.abs(s.real).max()):
        raise PairingFailureError("symplectic transformation failed to come out real")
    s = s.real

    if block is not None:
        # undo the balancing: S_phys = T S with T = diag(sqrt(w0), 1/sqrt(w0))
        root = np.sqrt(block.omega_scale)
        s = np.vstack([s[:n, :] * root, s[n:, :] / root])

    return NormalModes(lambdas=lams * unscale, s_symp=s, block=block)


def mode_report(h: QuadraticFluxHamiltonian) -> ModeReport:
    """Frequencies plus free-mode bookkeeping for a circuit Hamiltonian.

    When the harmonic block is strictly positive definite the full
    symplectic normal form is computed.  Otherwise the zero modes are
    counted from the spectrum of H_h J and only the nonzero frequencies
    are reported; no symplectic transformation exists in that case.
    """
    block = normal_coordinates(h)
    balanced = block.balanced()
    scale = max(np.abs(balanced).max(), 1e-300)
    if np.linalg.eigvalsh(balanced).min() > _EIG_TOL * scale:
        modes = williamson(block)
        return ModeReport(modes.lambdas.copy(), 0, modes, block)

    n = block.n_modes
    mu = np.linalg.eigvals(balanced @ _symplectic_form(n))
    tol = _EIG_TOL * scale
    zero = int(np.sum(np.abs(mu) < tol))
    freqs = np.sort(mu.imag[mu.imag > tol]) * block.omega_scale
    return ModeReport(freqs, zero // 2, None, block)


def mode_frequencies(h: QuadraticFluxHamiltonian) -> np.ndarray:
    """Physical angular frequencies of the harmonic sector, ascending."""
    return mode_report(h).frequencies


def omega_spectrum(h: QuadraticFluxHamiltonian) -> np.ndarray:
    """Ascending oscillator frequencies of the rescaled diagonal sector.

    These are the square roots of the Omega^2 diagonal, i.e. the
    stiffnesses seen after the gyration coupling is pushed into the
    off-diagonal Gamma block.  They dominate, element-wise, the normal
    frequencies of the same circuit with the gyration matrix removed.
    """
    block = normal_coordinates(h)
    w = np.diag(block.omega2)
    return np.sqrt(np.maximum(w, 0.0))


@dataclass(frozen=True)
class LadderMap:
    """Linear map from mode quadratures to circuit coordinates.

    Columns are modes: x = phi_xi @ xi + phi_pi @ pi and likewise for
    the momenta, with the quantization convention
    xi_n = (a_n + a_n^dag)/sqrt(2), pi_n = -i(a_n - a_n^dag)/sqrt(2).
    """

    phi_xi: np.ndarray
    phi_pi: np.ndarray
    q_xi: np.ndarray
    q_pi: np.ndarray
    lambdas: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "lambdas_rad_s": list(map(float, self.lambdas)),
            "phi_xi": self.phi_xi.tolist(),
            "phi_pi": self.phi_pi.tolist(),
            "q_xi": self.q_xi.tolist(),
            "q_pi": self.q_pi.tolist(),
        }


def ladder_map(modes: NormalModes) -> LadderMap:
    """Express the circuit coordinates through mode quadratures.

    Requires NormalModes produced from a HarmonicBlock so the canonical
    rescaling can be undone.
    """
    if modes.block is None:
        raise NotPositiveDefiniteError(
            "ladder_map needs modes derived from a circuit harmonic block"
        )
    n = modes.n_modes
    s = modes.s_symp
    # old coordinates z = (q, f) expressed as z = S (xi, pi)
    q_rows = s[:n, :]
    f_rows = s[n:, :]
    to_phi = modes.block.flux_from_scaled()
    to_q = modes.block.momentum_from_scaled()
    return LadderMap(
        phi_xi=to_phi @ f_rows[:, :n],
        phi_pi=to_phi @ f_rows[:, n:],
        q_xi=to_q @ q_rows[:, :n],
        q_pi=to_q @ q_rows[:, n:],
        lambdas=modes.lambdas.copy(),
    )
