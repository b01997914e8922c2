"""Small linear-algebra helpers shared by the solvers.

Two-qubit conventions: qubit 1 is the left tensor factor, the four chain
sites map onto product states as site 1 -> |00>, 2 -> |01>, 3 -> |10>,
4 -> |11>.  sigma_z |0> = +|0>.
"""

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)


def two_qubit_pauli(a, b):
    """kron(sigma_a, sigma_b) with a, b in {0,1,2,3} = {I,X,Y,Z}."""
    return np.kron(PAULIS[a], PAULIS[b])


# Diagonals of the traceless diagonal operator basis, ordered (ZI, IZ, ZZ).
DIAG_ZI = np.array([1.0, 1.0, -1.0, -1.0])
DIAG_IZ = np.array([1.0, -1.0, 1.0, -1.0])
DIAG_ZZ = np.array([1.0, -1.0, -1.0, 1.0])


def site_projector(i, n=4):
    """|i><i| with 0-based site index."""
    p = np.zeros((n, n), dtype=complex)
    p[i, i] = 1.0
    return p


def expm_hermitian(h, t=1.0):
    """exp(-1j * t * h) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def is_hermitian(m, tol=1e-12):
    return np.abs(m - m.conj().T).max() <= tol


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, eig_floor=-1e-8):
    """Validate the standard density-matrix invariants, raising ValueError.

    Tolerances follow the repository-wide contract: Hermitian to 1e-12,
    unit trace to 1e-10, eigenvalues above -1e-8.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    herm_err = np.abs(rho - rho.conj().T).max()
    if herm_err > herm_tol:
        raise ValueError(f"matrix not Hermitian: max asymmetry {herm_err:.3e}")
    trace_err = abs(rho.trace() - 1.0)
    if trace_err > trace_tol:
        raise ValueError(f"trace deviates from 1 by {trace_err:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < eig_floor:
        raise ValueError(f"negative eigenvalue {lo:.3e}")
    return rho


def pairwise_sum(arrays):
    """Deterministic binary-tree sum over a sequence of equal-shape arrays.

    The reduction order depends only on the sequence order, never on
    chunking or thread count, so ensemble averages are reproducible to
    the last bit and permutation tests see only genuine reordering.
    """
    items = list(arrays)
    if not items:
        raise ValueError("nothing to sum")
    while len(items) > 1:
        paired = []
        for i in range(0, len(items) - 1, 2):
            paired.append(items[i] + items[i + 1])
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]
