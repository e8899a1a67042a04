"""Independent brute-force ground truth.

Two unrelated oracles live here: the exact single-excitation propagator of a
finite discretized reservoir (eigen-decomposition of the star Hamiltonian),
and the QFI of a truncated Fock-space density matrix via the symmetric
logarithmic derivative.  Nothing in the main pipeline may call this module;
it is reached only from tests and the CLI ``verify`` command.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .gaussian import GaussianState
from .reservoir import DiscreteReservoir

__all__ = [
    "FockStateMatrix",
    "TruncationError",
    "DegenerateSpectrumWarning",
    "u_discrete",
    "build_fock_state",
    "qfi_fock_oracle",
    "default_fock_dim",
]


class TruncationError(RuntimeError):
    """Population leaked past the Fock-space truncation."""


class DegenerateSpectrumWarning(UserWarning):
    """Nearly degenerate eigenvalues off the kernel; SLD terms may be noisy."""


@dataclass(frozen=True)
class FockStateMatrix:
    """Sensor density operator in the number basis."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be square")
        if np.abs(rho - rho.conj().T).max() > 1e-12:
            raise ValueError("rho must be Hermitian")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.2e}")
        if float(np.linalg.eigvalsh(rho).min()) < -1e-10:
            raise ValueError("rho has a negative eigenvalue beyond tolerance")
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return int(self.rho.shape[0])


def u_discrete(disc: DiscreteReservoir, omega0: float, t):
    """Exact u(t) of the sensor + N discrete modes, single-excitation sector.

    Builds the (N+1) x (N+1) real-symmetric star Hamiltonian, diagonalizes it
    once, and returns sum_m |<sensor|m>|^2 e^{-i E_m t} for scalar or array t.
    """
    n = disc.n_modes
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = float(omega0)
    h[0, 1:] = disc.g
    h[1:, 0] = disc.g
    idx = np.arange(1, n + 1)
    h[idx, idx] = disc.omega
    energies, vecs = np.linalg.eigh(h)
    weights = vecs[0, :] ** 2
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = (weights[None, :] * np.exp(-1j * np.outer(ts, energies))).sum(axis=1)
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(out[0])
    return out


def default_fock_dim(nbar: float) -> int:
    """Truncation heavy-tailed enough for squeezed states."""
    return max(40, int(math.ceil(8.0 * nbar)))


def build_fock_state(state: GaussianState, dim: int, leak_tol: float = 1e-8) -> FockStateMatrix:
    """Realize a single-mode Gaussian state as a truncated number-basis matrix.

    Decomposes the covariance into a thermal core (symplectic eigenvalue
    nu = sqrt(det sigma)) squeezed by xi and displaced by d1, then builds the
    displacement and squeeze operators by matrix exponentials of truncated
    generators.  Raises TruncationError when the discarded-population
    diagnostic exceeds ``leak_tol``.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    a_diag = state.sigma[0, 0].real
    b_off = complex(state.sigma[0, 1])
    nu = math.sqrt(max(a_diag * a_diag - abs(b_off) ** 2, 1.0))
    cosh2 = max(a_diag / nu, 1.0)
    rho_mag = 0.5 * math.acosh(cosh2)
    phi = np.angle(-b_off) if abs(b_off) > 0 else 0.0
    xi = rho_mag * np.exp(1j * phi)

    a_op = np.diag(np.sqrt(np.arange(1, dim)), 1)
    ad_op = a_op.conj().T
    n_th = (nu - 1.0) / 2.0
    k = np.arange(dim)
    if n_th > 1e-14:
        pop = n_th**k / (1.0 + n_th) ** (k + 1.0)
    else:
        pop = np.zeros(dim)
        pop[0] = 1.0
    rho = np.diag(pop.astype(complex))
    if abs(xi) > 0:
        sq = expm(0.5 * (np.conj(xi) * (a_op @ a_op) - xi * (ad_op @ ad_op)))
        rho = sq @ rho @ sq.conj().T
    d1 = complex(state.d[0])
    if abs(d1) > 0:
        disp = expm(d1 * ad_op - np.conj(d1) * a_op)
        rho = disp @ rho @ disp.conj().T
    rho = 0.5 * (rho + rho.conj().T)

    leak = max(abs(1.0 - float(np.trace(rho).real)), float(rho[-1, -1].real))
    if leak > leak_tol:
        raise TruncationError(f"discarded-population diagnostic {leak:.2e} > {leak_tol:.0e}")
    return FockStateMatrix(rho=rho)


def qfi_fock_oracle(
    state_plus: FockStateMatrix, state_minus: FockStateMatrix, eps: float
) -> float:
    """SLD-based QFI from a pair of states at theta +- eps.

    Diagonalizes the central rho = (rho+ + rho-)/2, forms the central
    difference of rho, and sums 2 |<i|d rho|j>|^2 / (p_i + p_j) over pairs
    with p_i + p_j > 1e-10.
    """
    if state_plus.dim != state_minus.dim:
        raise ValueError("the two states must share one truncation dimension")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    rho_c = 0.5 * (state_plus.rho + state_minus.rho)
    drho = (state_plus.rho - state_minus.rho) / (2.0 * eps)
    p, vecs = np.linalg.eigh(rho_c)
    dr = vecs.conj().T @ drho @ vecs
    psum = p[:, None] + p[None, :]
    keep = psum > 1e-10
    pdiff = np.abs(p[:, None] - p[None, :])
    off = ~np.eye(len(p), dtype=bool)
    if np.any(keep & off & (pdiff < 1e-12) & (np.abs(dr) > 1e-12)):
        warnings.warn(
            "near-degenerate populations carry derivative weight",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    contrib = np.zeros_like(psum)
    contrib[keep] = 2.0 * np.abs(dr[keep]) ** 2 / psum[keep]
    return float(contrib.sum())
