"""Spin-chain Hamiltonians with engineered perfect-transfer couplings.

The chain Hamiltonian is

    H = sum_i J_i (X^[i] X^[i+1] + Y^[i] Y^[i+1]) + sum_i B_i Z^[i]

with half-normalized spin operators (see :mod:`spintransfer.operators`).
The perfect-transfer profile J_i = sqrt(i (N - i)) with constant field
gives a one-excitation spectrum with unit level spacing, so the transfer
period is tau = 2*pi and the chain mirrors itself at tau/2.  All rates
elsewhere in the package are quoted in units of 1/tau.

The proportionality constant of the coupling profile is fixed to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    commutator,
    embed,
    mirror_permutation,
    pauli,
    total_operator,
)


class NotEquallySpacedError(ValueError):
    """Raised when a spectrum expected to be harmonic is not."""


class DegenerateSpectrumError(ValueError):
    """Raised when degenerate levels carry conflicting mirror parities."""


@dataclass(frozen=True)
class ChainSpec:
    """Chain of n sites with couplings J (length n-1) and fields B (length n)."""

    n: int
    couplings: tuple
    fields: tuple

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(j) for j in self.couplings))
        object.__setattr__(self, "fields", tuple(float(b) for b in self.fields))
        if self.n < 2:
            raise ValueError("a chain needs at least 2 sites")
        if len(self.couplings) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} couplings, got {len(self.couplings)}")
        if len(self.fields) != self.n:
            raise ValueError(f"expected {self.n} fields, got {len(self.fields)}")

    @property
    def dim(self) -> int:
        return 2**self.n

    def to_dict(self) -> dict:
        return {"n": self.n, "couplings": list(self.couplings), "fields": list(self.fields)}

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSpec":
        return cls(n=int(d["n"]), couplings=tuple(d["couplings"]), fields=tuple(d["fields"]))


def pst_spec(n: int, field: float = 0.0) -> ChainSpec:
    """Perfect-transfer chain: J_i = sqrt(i(n-i)), constant field."""
    couplings = tuple(np.sqrt(i * (n - i)) for i in range(1, n))
    return ChainSpec(n=n, couplings=couplings, fields=(float(field),) * n)


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    x, y, z = pauli("x"), pauli("y"), pauli("z")
    h = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    for i, j in enumerate(spec.couplings, start=1):
        h += j * (embed(x, i, spec.n) @ embed(x, i + 1, spec.n)
                  + embed(y, i, spec.n) @ embed(y, i + 1, spec.n))
    for i, b in enumerate(spec.fields, start=1):
        if b != 0.0:
            h += b * embed(z, i, spec.n)
    return h


def one_excitation_block(spec: ChainSpec) -> np.ndarray:
    """H restricted to single-excitation states |e_1>, ..., |e_n>."""
    n = spec.n
    block = np.zeros((n, n), dtype=np.float64)
    half_field_sum = 0.5 * sum(spec.fields)
    for i in range(n):
        # flipping site i+1 switches its Z eigenvalue from +1/2 to -1/2
        block[i, i] = half_field_sum - spec.fields[i]
    for i, j in enumerate(spec.couplings):
        block[i, i + 1] = block[i + 1, i] = 0.5 * j
    return block


def spectral_decomposition(h: np.ndarray):
    """Eigenvalues and eigenvectors of a Hermitian operator."""
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def propagator(evals: np.ndarray, evecs: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) from a spectral decomposition of H."""
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


@dataclass(frozen=True)
class SpectrumReport:
    energies: np.ndarray
    spacing: float
    offset: float
    parity_ok: bool
    max_spacing_error: float


def _mirror_parities(evals, evecs, mirror, tol):
    """Mirror parity per eigenvector, resolving degenerate subspaces.

    Energies within `tol` of each other are treated as one level;
    inside each level, the mirror operator is diagonalized and every
    eigenvalue must be +1 or -1 with a single common sign.
    """
    parities = np.zeros(len(evals))
    i = 0
    scale = max(1.0, float(np.max(np.abs(evals))))
    while i < len(evals):
        j = i + 1
        while j < len(evals) and abs(evals[j] - evals[i]) <= tol * scale:
            j += 1
        sub = evecs[:, i:j]
        pmp = sub.conj().T @ mirror @ sub
        signs = np.linalg.eigvalsh(pmp)
        if np.max(np.abs(np.abs(signs) - 1.0)) > 1e-8:
            raise DegenerateSpectrumError(
                f"mirror is not +-1 on the eigenspace at E={evals[i]:.6g}")
        if np.max(signs) - np.min(signs) > 1e-8 and j - i > 1:
            raise DegenerateSpectrumError(
                f"degenerate level at E={evals[i]:.6g} mixes both mirror parities")
        parities[i:j] = np.sign(np.mean(signs))
        i = j
    return parities


def verify_parity_matching(spec: ChainSpec, tol: float = 1e-9,
                           full_spectrum: bool = False) -> SpectrumReport:
    """Check equal level spacing with alternating mirror parity.

    By default only the one-excitation block is examined, which is the
    sector relevant for both encodings; `full_spectrum=True` diagonalizes
    the whole 2^n Hamiltonian instead.  Returns a report whose
    `parity_ok` is true when the gaps are uniform within `tol` (relative
    to the mean gap) and the eigenvector parities alternate level by
    level.
    """
    if full_spectrum:
        h = build_hamiltonian(spec)
        mirror = mirror_permutation(spec.n)
    else:
        h = one_excitation_block(spec)
        mirror = np.eye(spec.n)[::-1].astype(np.complex128)
    evals, evecs = spectral_decomposition(h)

    gaps = np.diff(evals)
    mean_gap = float(np.mean(gaps)) if len(gaps) else 0.0
    if mean_gap <= 0.0:
        return SpectrumReport(evals, 0.0, float(evals[0]), False, np.inf)
    max_err = float(np.max(np.abs(gaps - mean_gap)) / mean_gap)
    spacing_ok = max_err < tol

    parities = _mirror_parities(evals, evecs, mirror, tol)
    alternating = bool(np.all(parities[1:] * parities[:-1] < 0.0))

    return SpectrumReport(
        energies=evals,
        spacing=mean_gap,
        offset=float(evals[0]),
        parity_ok=spacing_ok and alternating,
        max_spacing_error=max_err,
    )


def transfer_period(spec: ChainSpec, tol: float = 1e-9) -> float:
    """Period tau = 2*pi/E of the one-excitation dynamics.

    Raises NotEquallySpacedError when the one-excitation gaps deviate
    from their mean by more than `tol` (relative).
    """
    evals = np.linalg.eigvalsh(one_excitation_block(spec))
    gaps = np.diff(evals)
    mean_gap = float(np.mean(gaps))
    if mean_gap <= 0.0 or np.max(np.abs(gaps - mean_gap)) / abs(mean_gap) > tol:
        raise NotEquallySpacedError(
            "one-excitation spectrum is not equally spaced; "
            "this chain has no common transfer period")
    return 2.0 * np.pi / mean_gap


def sector_phases(spec: ChainSpec) -> tuple:
    """Phases (c0, c1) picked up by the 0- and 1-excitation sectors at tau/2.

    c0 is the amplitude <vac|U|vac>, c1 the mirror amplitude
    <e_n|U|e_1>; for a parity-matched chain |c0| = |c1| = 1 and every
    one-excitation state mirrors with the common phase c1.  Used to fix
    the relative sector phase when decoding the single-site code.
    """
    tau = transfer_period(spec)
    # vacuum: H|vac> = (sum_i B_i / 2)|vac>
    c0 = np.exp(-1j * 0.5 * sum(spec.fields) * (tau / 2.0))
    block = one_excitation_block(spec)
    evals, evecs = spectral_decomposition(block)
    u1 = propagator(evals, evecs, tau / 2.0)
    c1 = complex(u1[spec.n - 1, 0])
    if abs(abs(c1) - 1.0) > 1e-9:
        raise NotEquallySpacedError(
            f"chain does not transfer perfectly (|amplitude| = {abs(c1):.6f})")
    return c0, c1
