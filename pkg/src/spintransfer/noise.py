"""Catalog of Lindblad noise models for the chain.

Every model is a list of (jump operator K, rate) pairs for the dissipator

    D(rho) = sum_i gamma_i (K_i rho K_i^dag - 1/2 {K_i^dag K_i, rho}).

Thermal models act against a local level splitting B > 0 whose ground
state is the up state |0>: the terms that relax a flipped spin back to
|0> (jump operator ``pauli("s+")``) carry the bare rate gamma, while the
reverse, excitation-creating terms (``pauli("s-")``) are suppressed by
the Boltzmann factor exp(-beta*B).  At beta*B = inf only the relaxation
terms survive and the chain decays toward |00...0>.

Rates are plain Lindblad-equation rates in the energy units of the
Hamiltonian; the fidelity layer converts from the 1/tau units used in
sweep grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .operators import embed, pauli


class ThermalParamMissingError(ValueError):
    """A thermal model was requested without a beta*B value."""


class NoiseKind(str, Enum):
    """Catalog identifiers; the values double as CLI names."""

    LOCAL_TWIRL = "twirl"
    LOCAL_THERMAL = "thermal-local"
    LOCAL_DEPHASE = "dephase-local"
    GLOBAL_DEPHASE = "dephase-global"
    GLOBAL_THERMAL = "thermal-global"
    NONE = "none"


THERMAL_KINDS = (NoiseKind.LOCAL_THERMAL, NoiseKind.GLOBAL_THERMAL)

CATALOG = tuple(k for k in NoiseKind if k is not NoiseKind.NONE)


@dataclass(frozen=True)
class LocalTerm:
    """Jump operator acting on a single site: K = op^[site]."""

    site: int
    op: np.ndarray
    rate: float


@dataclass(frozen=True)
class CollectiveTerm:
    """Jump operator summed over all sites: K = sum_j op^[j]."""

    op: np.ndarray
    rate: float


@dataclass(frozen=True)
class NoiseModel:
    kind: NoiseKind
    gamma: float
    beta_b: float | None
    n: int
    local_terms: tuple = field(default_factory=tuple)
    collective_terms: tuple = field(default_factory=tuple)

    @property
    def terms(self) -> list:
        """Dense (K, rate) pairs on the full 2^n space."""
        out = [(embed(t.op, t.site, self.n), t.rate) for t in self.local_terms]
        for t in self.collective_terms:
            k = sum(embed(t.op, j, self.n) for j in range(1, self.n + 1))
            out.append((k, t.rate))
        return out

    @property
    def term_count(self) -> int:
        return len(self.local_terms) + len(self.collective_terms)

    @property
    def max_rate(self) -> float:
        rates = [t.rate for t in self.local_terms] + [t.rate for t in self.collective_terms]
        return max(rates, default=0.0)

    @property
    def is_trivial(self) -> bool:
        return self.max_rate == 0.0


def _boltzmann(beta_b) -> float:
    if beta_b is None:
        raise ThermalParamMissingError("thermal noise requires beta_b (use float('inf') for T=0)")
    beta_b = float(beta_b)
    if beta_b < 0.0:
        raise ValueError("beta_b must be >= 0")
    return float(np.exp(-beta_b))


def make_noise(kind, gamma: float, beta_b=None, n: int = None) -> NoiseModel:
    """Build a catalog noise model for an n-site chain.

    gamma is the Lindblad rate of the dominant terms; thermal models also
    need beta_b, the dimensionless product of inverse bath temperature
    and level splitting (beta_b = inf is exact: excitation rates are set
    to literal zero).
    """
    kind = NoiseKind(kind)
    if n is None or n < 1:
        raise ValueError("make_noise needs the chain length n")
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    gamma = float(gamma)

    sites = range(1, n + 1)
    local: list = []
    collective: list = []

    if kind is NoiseKind.LOCAL_TWIRL:
        for i in sites:
            for p in ("x", "y", "z"):
                local.append(LocalTerm(i, pauli(p), gamma))
    elif kind is NoiseKind.LOCAL_THERMAL:
        up = gamma * _boltzmann(beta_b)
        for i in sites:
            local.append(LocalTerm(i, pauli("s+"), gamma))  # relax toward |0>
            local.append(LocalTerm(i, pauli("s-"), up))     # thermal excitation
    elif kind is NoiseKind.LOCAL_DEPHASE:
        for i in sites:
            local.append(LocalTerm(i, pauli("z"), gamma))
    elif kind is NoiseKind.GLOBAL_DEPHASE:
        collective.append(CollectiveTerm(pauli("z"), gamma))
    elif kind is NoiseKind.GLOBAL_THERMAL:
        up = gamma * _boltzmann(beta_b)
        collective.append(CollectiveTerm(pauli("s+"), gamma))
        collective.append(CollectiveTerm(pauli("s-"), up))
    elif kind is NoiseKind.NONE:
        pass
    else:  # pragma: no cover
        raise ValueError(f"unhandled noise kind {kind}")

    beta = float(beta_b) if (kind in THERMAL_KINDS and beta_b is not None) else None
    return NoiseModel(kind=kind, gamma=gamma, beta_b=beta, n=n,
                      local_terms=tuple(local), collective_terms=tuple(collective))
