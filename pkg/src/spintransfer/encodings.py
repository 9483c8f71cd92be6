"""Logical-qubit encodings for chain state transfer.

Three codes are provided:

* ``a`` - the single-site code.  The message qubit sits on site 1 and
  logical |0> is the fully magnetized chain |00...0>.
* ``b`` - the two-site code.  The two logical levels are the
  one-excitation states |10...0> and |01...0>; the receiver applies a
  projective read-out onto the one-excitation subspace of the last two
  sites and substitutes the maximally mixed logical state when the
  projection fails.
* ``singlet`` - a two-state code in the four-site singlet subspace,
  used to probe collective-noise robustness.

Logical-basis convention (fixed here and enforced by the round-trip
tests): for code ``b``, |10...0> is logical |0> and |01...0> is logical
|1>; after the mirror the receiver reads logical |0> from the pair state
|01> on sites (n-1, n).  For code ``singlet``, s1 is logical |0>.

Coding operators are Hermitian, carry the same 1/2 normalization as the
site operators, and satisfy rho(r) = I_code + r_x X_code + r_y Y_code +
r_z Z_code for any Bloch vector r.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .chain import ChainSpec, pst_spec, sector_phases
from .operators import kron_all, partial_trace_keep_last, pauli

_EYE2 = np.eye(2, dtype=np.complex128)


class BlochOutOfBallError(ValueError):
    """Bloch vector with |r| > 1 cannot be encoded as a state."""


class NonUnitTraceError(ValueError):
    """decode expects a unit-trace density matrix."""


class EncodingId(str, Enum):
    A = "a"
    B = "b"
    SINGLET = "singlet"


@dataclass(frozen=True)
class ReadoutRule:
    """Projective read-out on the receiver pair with a mixed fallback."""

    projector: np.ndarray    # on the receiver sites
    fail_state: np.ndarray   # unit-trace fallback on the receiver sites


@dataclass(frozen=True)
class EncodingScheme:
    id: EncodingId
    n: int
    sender_sites: tuple
    receiver_sites: tuple
    coding_ops: dict          # {'i','x','y','z'} -> operator on the full chain
    sender_factor_ops: dict   # same keys, on the sender-site factor only
    readout: ReadoutRule | None = None

    @property
    def sender_width(self) -> int:
        return len(self.sender_sites)

    @property
    def receiver_width(self) -> int:
        return len(self.receiver_sites)


def _full_chain(op_factor: np.ndarray, width: int, n: int) -> np.ndarray:
    return np.kron(op_factor, np.eye(2 ** (n - width), dtype=np.complex128))


def _scheme(scheme_id, n, width, factor_ops, readout=None) -> EncodingScheme:
    coding = {k: _full_chain(v, width, n) for k, v in factor_ops.items()}
    return EncodingScheme(
        id=scheme_id,
        n=n,
        sender_sites=tuple(range(1, width + 1)),
        receiver_sites=tuple(range(n - width + 1, n + 1)),
        coding_ops=coding,
        sender_factor_ops={k: v.copy() for k, v in factor_ops.items()},
        readout=readout,
    )


def scheme_a(n: int) -> EncodingScheme:
    """Single-site code on site 1."""
    ops = {k: pauli(k) for k in ("i", "x", "y", "z")}
    return _scheme(EncodingId.A, n, 1, ops)


def scheme_b(n: int) -> EncodingScheme:
    """Two-site one-excitation code on sites 1, 2."""
    if n < 2:
        raise ValueError("code b needs at least 2 sites")
    x, y, z, i = pauli("x"), pauli("y"), pauli("z"), pauli("i")
    ops = {
        "i": np.kron(i, i) - np.kron(z, z),
        "x": np.kron(x, x) + np.kron(y, y),
        "y": np.kron(x, y) - np.kron(y, x),
        "z": 0.5 * (np.kron(_EYE2, z) - np.kron(z, _EYE2)),
    }
    readout = ReadoutRule(
        projector=np.diag([0.0, 1.0, 1.0, 0.0]).astype(np.complex128),
        fail_state=np.diag([0.0, 0.5, 0.5, 0.0]).astype(np.complex128),
    )
    return _scheme(EncodingId.B, n, 2, ops, readout)


def singlet_states() -> tuple:
    """The two zero-angular-momentum states of four spins, (s1, s2)."""
    def ket(bits):
        v = np.zeros(16, dtype=np.complex128)
        v[int(bits, 2)] = 1.0
        return v

    s1 = 0.5 * (ket("0101") - ket("0110") - ket("1001") + ket("1010"))
    s2 = (ket("1100") + ket("0011")
          - 0.5 * (ket("0101") + ket("0110") + ket("1001") + ket("1010"))) / np.sqrt(3.0)
    return s1, s2


def scheme_singlet(n: int) -> EncodingScheme:
    """Two-state code spanned by the four-site singlets on sites 1..4."""
    if n < 8:
        raise ValueError("the singlet code needs n >= 8 (four sites at each end)")
    s1, s2 = singlet_states()
    p1 = np.outer(s1, s1.conj())
    p2 = np.outer(s2, s2.conj())
    cross = np.outer(s1, s2.conj())
    ops = {
        "i": 0.5 * (p1 + p2),
        "x": 0.5 * (cross + cross.conj().T),
        "y": 0.5 * (-1j * cross + 1j * cross.conj().T),
        "z": 0.5 * (p1 - p2),
    }
    return _scheme(EncodingId.SINGLET, n, 4, ops)


def get_scheme(scheme_id, n: int) -> EncodingScheme:
    scheme_id = EncodingId(scheme_id)
    builder = {EncodingId.A: scheme_a, EncodingId.B: scheme_b,
               EncodingId.SINGLET: scheme_singlet}[scheme_id]
    return builder(n)


def vacuum_padded(scheme: EncodingScheme, key: str) -> np.ndarray:
    """Coding operator tensored with the all-up state of the other sites."""
    rest = 2 ** (scheme.n - scheme.sender_width)
    vac = np.zeros((rest, rest), dtype=np.complex128)
    vac[0, 0] = 1.0
    return np.kron(scheme.sender_factor_ops[key], vac)


def encode(scheme: EncodingScheme, r) -> np.ndarray:
    """Initial chain state for Bloch vector r = (r_x, r_y, r_z)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if float(r @ r) > 1.0 + 1e-12:
        raise BlochOutOfBallError(f"|r| = {np.linalg.norm(r):.6f} > 1")
    rho = vacuum_padded(scheme, "i")
    for comp, key in zip(r, ("x", "y", "z")):
        if comp != 0.0:
            rho = rho + comp * vacuum_padded(scheme, key)
    return rho


def decode_phase_correction(spec: ChainSpec) -> np.ndarray:
    """Unitary fixing the 0/1-excitation sector phase for code ``a``.

    The mirror at tau/2 multiplies the vacuum sector by c0 and the
    one-excitation sector by c1; applying diag(conj(c0), conj(c1)) to
    the received qubit removes the relative phase.
    """
    c0, c1 = sector_phases(spec)
    return np.diag([np.conj(c0), np.conj(c1)])


def _check_state(rho: np.ndarray):
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-6:
        raise NonUnitTraceError(f"trace {tr:.8f} differs from 1 by more than 1e-6")


def decode(scheme: EncodingScheme, rho_final: np.ndarray,
           spec: ChainSpec | None = None) -> np.ndarray:
    """Read the logical qubit out of the final chain state.

    Code ``a``: partial trace onto the last site followed by the sector
    phase correction.  Code ``b``: read-out projection on the last two
    sites, mixed fallback weighted by the failure probability, then the
    map {|01> -> |0>, |10> -> |1>} on the receiver pair (phases common
    to the one-excitation sector cancel, so no further correction).
    The default chain is the perfect-transfer chain with zero field.
    """
    _check_state(rho_final)
    if spec is None:
        spec = pst_spec(scheme.n, 0.0)

    if scheme.id is EncodingId.A:
        reduced = partial_trace_keep_last(rho_final, scheme.n, 1)
        d = decode_phase_correction(spec)
        return d @ reduced @ d.conj().T

    if scheme.id is EncodingId.B:
        p = scheme.readout.projector
        p_full = np.kron(np.eye(2 ** (scheme.n - 2), dtype=np.complex128), p)
        projected = p_full @ rho_final @ p_full
        weight = float(np.real(np.trace(projected)))
        pair = partial_trace_keep_last(projected, scheme.n, 2)
        pair = pair + (1.0 - weight) * scheme.readout.fail_state
        # receiver logical basis: |01> is logical 0, |10> is logical 1
        idx = np.array([1, 2])
        return pair[np.ix_(idx, idx)]

    raise NotImplementedError(
        "no read-out protocol is defined for the singlet code; "
        "use the operator-transfer fidelity instead")
