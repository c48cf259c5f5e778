"""Exact finite-dimensional quantum math for one and two qubits.

States, unitaries and channels are handled in two representations:

* density matrices / unitaries as complex ndarrays,
* channels as real Pauli transfer matrices (PTMs).

The two-qubit Pauli basis is fixed once and for all as
II, IX, IY, IZ, XI, ..., ZZ (identity first, lexicographic, first letter
acting on qubit 1).  Every serialized matrix in this package indexes into
this ordering, so it is part of the wire format and must not change.

Conventions:

* un-normalized Paulis with the 1/d factor inside
  ``M_ij = Tr(P_i Lambda(P_j)) / d``, which makes the (II, II) entry of a
  trace-preserving map equal to 1,
* state vectors ``s_i = Tr(P_i rho)``, effect vectors
  ``e_i = Tr(P_i E) / d``, so that ``p = e . (M s)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

I2 = np.eye(2, dtype=complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULIS_1Q = (I2, SX, SY, SZ)
PAULI_LABELS_1Q = ("I", "X", "Y", "Z")

# Two-qubit basis, qubit-1 label major: II, IX, IY, IZ, XI, ... ZZ.
PAULI_LABELS_2Q = tuple(a + b for a in PAULI_LABELS_1Q for b in PAULI_LABELS_1Q)
PAULIS_2Q = np.array([np.kron(a, b) for a in PAULIS_1Q for b in PAULIS_1Q])

# Row/column indices of the single-qubit subspace blocks: Pauli labels that
# act as identity on the other qubit.
SUBSPACE_INDICES = {1: np.array([0, 4, 8, 12]), 2: np.array([0, 1, 2, 3])}


def _pauli_set(n_qubits):
    if n_qubits == 1:
        return np.array(PAULIS_1Q)
    if n_qubits == 2:
        return PAULIS_2Q
    raise ValueError(f"only 1 or 2 qubits supported, got {n_qubits}")


def pauli_labels(n_qubits: int = 2) -> tuple[str, ...]:
    """Basis labels in wire-format order."""
    return PAULI_LABELS_1Q if n_qubits == 1 else PAULI_LABELS_2Q


def check_unitary(U: np.ndarray, tol: float = 1e-10) -> None:
    """Raise ValueError with the unitarity residual if U is not unitary."""
    U = np.asarray(U, dtype=complex)
    residual = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if residual > tol:
        raise ValueError(f"matrix is not unitary (residual {residual:.3e})")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12,
                         eig_tol: float = 1e-10) -> None:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    herm = np.linalg.norm(rho - rho.conj().T)
    if herm > tol:
        raise ValueError(f"density matrix not Hermitian (residual {herm:.3e})")
    tr = abs(np.trace(rho) - 1.0)
    if tr > tol:
        raise ValueError(f"density matrix trace deviates from 1 by {tr:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")


def ptm_from_unitary(U: np.ndarray) -> np.ndarray:
    """PTM of the unitary channel rho -> U rho U†.

    M_ij = Tr(P_i U P_j U†) / d.  The result is a real orthogonal matrix
    with first row and column (1, 0, ..., 0).
    """
    U = np.asarray(U, dtype=complex)
    check_unitary(U)
    d = U.shape[0]
    P = _pauli_set({2: 1, 4: 2}[d])
    conj = np.einsum("ab,jbc,dc->jad", U, P, U.conj())
    M = np.einsum("iab,jba->ij", P, conj).real / d
    return M


def ptm_from_channel(kraus: list[np.ndarray]) -> np.ndarray:
    """PTM of the channel with the given Kraus operators."""
    d = kraus[0].shape[0]
    P = _pauli_set({2: 1, 4: 2}[d])
    M = np.zeros((d * d, d * d))
    for K in kraus:
        conj = np.einsum("ab,jbc,dc->jad", K, P, np.conj(K))
        M += np.einsum("iab,jba->ij", P, conj).real / d
    return M


def state_to_pauli_vec(rho: np.ndarray) -> np.ndarray:
    """Pauli coefficient vector s_i = Tr(P_i rho)."""
    rho = np.asarray(rho, dtype=complex)
    P = _pauli_set({2: 1, 4: 2}[rho.shape[0]])
    return np.einsum("iab,ba->i", P, rho).real


def pauli_vec_to_state(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`state_to_pauli_vec`: rho = sum_i s_i P_i / d."""
    s = np.asarray(s, dtype=float)
    n = {4: 1, 16: 2}[s.size]
    P = _pauli_set(n)
    d = 2 ** n
    return np.einsum("i,iab->ab", s, P.astype(complex)) / d


def effect_to_pauli_vec(E: np.ndarray) -> np.ndarray:
    """Effect vector e_i = Tr(P_i E) / d, so that p = e . s."""
    E = np.asarray(E, dtype=complex)
    d = E.shape[0]
    P = _pauli_set({2: 1, 4: 2}[d])
    return np.einsum("iab,ba->i", P, E).real / d


def apply_channel(M: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a PTM to a density matrix and return the output state."""
    M = np.asarray(M, dtype=float)
    rho = np.asarray(rho, dtype=complex)
    if M.shape[0] != rho.shape[0] ** 2:
        raise ValueError(
            f"dimension mismatch: PTM is {M.shape[0]}x{M.shape[1]}, "
            f"state is {rho.shape[0]}x{rho.shape[0]}")
    return pauli_vec_to_state(M @ state_to_pauli_vec(rho))


def project_subspace(M: np.ndarray, qubit: int) -> np.ndarray:
    """4x4 sub-block of a two-qubit PTM on the labels acting only on `qubit`.

    For qubit 1 these are II, XI, YI, ZI; for qubit 2 II, IX, IY, IZ.
    """
    M = np.asarray(M)
    if M.shape != (16, 16):
        raise ValueError("expected a 16x16 two-qubit PTM")
    if qubit not in SUBSPACE_INDICES:
        raise ValueError(f"qubit index must be 1 or 2, got {qubit}")
    idx = SUBSPACE_INDICES[qubit]
    return M[np.ix_(idx, idx)]


def real_matrix_log(E: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Principal real logarithm of a real matrix near the identity.

    Uses an eigendecomposition with an explicit principal-branch check;
    eigenvalues on the negative real axis are rejected rather than silently
    assigned a branch.  Falls back to scipy's inverse-scaling-and-squaring
    logm when the eigenbasis is too ill-conditioned.  The result L satisfies
    expm(L) = E to `tol` in max-norm.
    """
    E = np.asarray(E, dtype=float)
    if E.shape[0] != E.shape[1]:
        raise ValueError("matrix log requires a square matrix")
    w, V = np.linalg.eig(E)
    on_branch_cut = (w.real < 0) & (np.abs(w.imag) < 1e-12 * np.abs(w.real))
    if np.any(on_branch_cut):
        bad = w[on_branch_cut]
        raise ValueError(
            "eigenvalue(s) on the negative real axis, principal log "
            f"undefined: {bad}")
    try:
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    if cond < 1e8:
        L = (V @ np.diag(np.log(w)) @ np.linalg.inv(V)).real
    else:
        L = scipy.linalg.logm(E).real
    residual = np.max(np.abs(scipy.linalg.expm(L) - E))
    if residual > tol:
        raise ValueError(f"matrix log round-trip residual {residual:.3e}")
    return L


def ptm_to_superop(M: np.ndarray) -> np.ndarray:
    """Convert a PTM to a column-stacking superoperator.

    With B the unitary whose columns are vec(P_i)/sqrt(d), the superoperator
    is S = B M B†.  Works for any matrix in the Pauli basis (channels, error
    generators).
    """
    M = np.asarray(M, dtype=float)
    n = {4: 1, 16: 2}[M.shape[0]]
    B = _pauli_vec_basis(n)
    return B @ M.astype(complex) @ B.conj().T


def superop_to_ptm(S: np.ndarray) -> np.ndarray:
    n = {4: 1, 16: 2}[S.shape[0]]
    B = _pauli_vec_basis(n)
    return (B.conj().T @ np.asarray(S, dtype=complex) @ B).real


def _pauli_vec_basis(n_qubits):
    P = _pauli_set(n_qubits)
    d = 2 ** n_qubits
    # vec() in column-stacking (Fortran) order.
    return np.stack([p.flatten(order="F") for p in P], axis=1) / np.sqrt(d)


def superop_apply(S: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a column-stacking superoperator to a matrix."""
    d = rho.shape[0]
    return (S @ np.asarray(rho, dtype=complex).flatten(order="F")).reshape(
        (d, d), order="F")


def ptm_to_choi(M: np.ndarray) -> np.ndarray:
    """Choi matrix of a PTM, input slot first, normalized to trace 1 for TP maps.

    C = (1/d) sum_ij |i><j| (x) Lambda(|i><j|).  CP maps have C >= 0.
    """
    S = ptm_to_superop(M)
    d = int(np.sqrt(S.shape[0]))
    C = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            C += np.kron(unit, superop_apply(S, unit))
    return C / d


def choi_to_ptm(C: np.ndarray) -> np.ndarray:
    """Inverse of :func:`ptm_to_choi`."""
    C = np.asarray(C, dtype=complex)
    d = int(np.sqrt(C.shape[0]))
    n = {2: 1, 4: 2}[d]
    P = _pauli_set(n)
    # M_ij = Tr[ d C (P_j^T (x) P_i) ] / d = Tr[ C (P_j^T (x) P_i) ].
    M = np.empty((d * d, d * d))
    for j in range(d * d):
        PjT = P[j].T
        for i in range(d * d):
            M[i, j] = np.trace(C @ np.kron(PjT, P[i])).real
    return M


def choi_min_eigenvalue(M: np.ndarray) -> float:
    """Smallest eigenvalue of the Choi matrix; >= 0 iff the map is CP."""
    return float(np.linalg.eigvalsh(ptm_to_choi(M)).min())


def ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ket('01') for qubit1=0, qubit2=1."""
    v = np.array([1.0 + 0j])
    for b in bits:
        v = np.kron(v, np.array([1.0, 0.0]) if b == "0" else np.array([0.0, 1.0]))
    return v.astype(complex)


def ket_dm(bits: str) -> np.ndarray:
    v = ket(bits)
    return np.outer(v, v.conj())
