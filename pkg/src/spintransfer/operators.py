"""Dense operator algebra for spin-1/2 chains.

Conventions used throughout the package:

* Single-site spin operators carry the 1/2 normalization, i.e.
  ``X = sigma_x / 2`` and likewise for Y and Z, while ``pauli("i")`` is
  half the identity so that ``rho = I + r_x X + r_y Y + r_z Z`` is a unit
  trace qubit state for any Bloch vector r.
* ``pauli("s+") = X + iY = [[0, 1], [0, 0]]`` maps the flipped state
  ``|1>`` back to ``|0>``; it annihilates the all-up state ``|00...0>``.
  ``pauli("s-")`` is its adjoint and creates a flipped spin.
* The chain basis is the computational basis ``|b_1 b_2 ... b_N>`` with
  site 1 as the most significant bit. ``|0>`` is the up (magnetized)
  state with Z eigenvalue +1/2.

All operators are plain ``numpy.ndarray`` of complex128; matrices are
immutable by convention once built (callers must not write into them).
"""

from __future__ import annotations

import numpy as np

_X = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_Y = 0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_Z = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_I = 0.5 * np.eye(2, dtype=np.complex128)
_SP = _X + 1j * _Y  # [[0,1],[0,0]]
_SM = _X - 1j * _Y  # [[0,0],[1,0]]

_PAULI = {"x": _X, "y": _Y, "z": _Z, "i": _I, "s+": _SP, "s-": _SM}

PAULI_KINDS = tuple(_PAULI)


def pauli(kind: str) -> np.ndarray:
    """Return the 2x2 operator for kind in {x, y, z, i, s+, s-}."""
    try:
        return _PAULI[kind.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {PAULI_KINDS}")


def site_count(dim: int) -> int:
    """Number of sites for a Hilbert-space dimension; dim must be a power of 2."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def kron_all(ops) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op2x2: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a 2x2 operator at `site` (1-based), bare identity elsewhere."""
    if op2x2.shape != (2, 2):
        raise ValueError("embed expects a 2x2 operator")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    eye2 = np.eye(2, dtype=np.complex128)
    return kron_all(op2x2 if j == site else eye2 for j in range(1, n_sites + 1))


def total_operator(kind: str, n_sites: int) -> np.ndarray:
    """Sum of the single-site operator `kind` over all sites."""
    if kind.lower() == "i":
        raise ValueError("total_operator is not defined for the identity")
    op = pauli(kind)
    out = np.zeros((2**n_sites, 2**n_sites), dtype=np.complex128)
    for j in range(1, n_sites + 1):
        out += embed(op, j, n_sites)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermitize(m: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (M + M^dag)/2."""
    return 0.5 * (m + m.conj().T)


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return hermiticity_defect(m) < tol


def vacuum_state(n_sites: int) -> np.ndarray:
    """The all-up product state |00...0>."""
    v = np.zeros(2**n_sites, dtype=np.complex128)
    v[0] = 1.0
    return v


def basis_state(bits: str) -> np.ndarray:
    """Computational basis ket from a bit string, site 1 first."""
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def single_excitation(site: int, n_sites: int) -> np.ndarray:
    """Basis ket with exactly the given site flipped."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    v = np.zeros(2**n_sites, dtype=np.complex128)
    v[1 << (n_sites - site)] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    return np.outer(vec, vec.conj())


def partial_trace_keep_last(m: np.ndarray, n_sites: int, keep: int) -> np.ndarray:
    """Trace out sites 1..N-keep, returning the operator on the last `keep` sites."""
    if not 0 < keep <= n_sites:
        raise ValueError(f"keep={keep} out of range for {n_sites} sites")
    dk = 2**keep
    dr = 2 ** (n_sites - keep)
    v = m.reshape(dr, dk, dr, dk)
    return np.einsum("ajak->jk", v)


def mirror_permutation(n_sites: int) -> np.ndarray:
    """Site-reversal permutation matrix M, |b_1...b_N> -> |b_N...b_1>."""
    d = 2**n_sites
    perm = np.zeros(d, dtype=np.int64)
    for b in range(d):
        r = 0
        x = b
        for _ in range(n_sites):
            r = (r << 1) | (x & 1)
            x >>= 1
        perm[b] = r
    m = np.zeros((d, d), dtype=np.complex128)
    m[perm, np.arange(d)] = 1.0
    return m
