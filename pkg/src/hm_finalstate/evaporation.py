"""Final-state projection dynamics for matter states."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .states import BoundaryUnitary
from .tensor import DensityOperator, HilbertLayout, StateVector, operator_norm

UNDEFINED_TRACE = 1e-14


def transfer_operator(u: BoundaryUnitary, out_dim: int | None = None) -> np.ndarray:
    """``P = (1/N) sum_lm conj(U_lm) |m>_out <l|_M`` as an ``(out_dim, N)`` matrix.

    Entry ``(m, l)`` is ``conj(U_lm) / N``, so ``P`` is ``U^dagger / N`` padded
    with zero rows beyond ``N``.
    """
    n = u.n
    out_dim = n if out_dim is None else out_dim
    if out_dim < n:
        raise ValueError(f"out_dim={out_dim} is smaller than N={n}")
    p = np.zeros((out_dim, n), dtype=complex)
    p[:n, :] = u.matrix.conj().T / n
    return p


def evaporate_pure(phi: StateVector, u: BoundaryUnitary, out_dim: int | None = None) -> StateVector:
    if not phi.normalized:
        raise ValueError("input matter state must be normalized")
    p = transfer_operator(u, out_dim)
    return StateVector(HilbertLayout((("out", p.shape[0]),)), p @ phi.amplitudes, normalized=False)


def evaporate_density(rho_m: DensityOperator, u: BoundaryUnitary,
                      out_dim: int | None = None) -> DensityOperator:
    p = transfer_operator(u, out_dim)
    out = p @ rho_m.matrix @ p.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityOperator(HilbertLayout((("out", p.shape[0]),)), out)


def mixedness(rho: DensityOperator | np.ndarray) -> float:
    """Purity ``Tr(rho^2)``."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def w_operator(u: BoundaryUnitary, out_dim: int | None = None) -> np.ndarray:
    p = transfer_operator(u, out_dim)
    return p.conj().T @ p


@dataclass(frozen=True)
class MixednessReport:
    purity_in: float
    purity_out: float
    # None when the output trace is numerically zero
    purity_out_normalized: float | None
    output_trace: float
    w_norm: float
    contraction_holds: bool

    def as_dict(self) -> dict:
        return asdict(self)


def mixedness_report(rho_m: DensityOperator, u: BoundaryUnitary) -> MixednessReport:
    p = transfer_operator(u)
    out = p @ rho_m.matrix @ p.conj().T
    tr = float(np.trace(out).real)
    purity_in = mixedness(rho_m)
    purity_out = mixedness(out)
    normalized = purity_out / tr**2 if tr >= UNDEFINED_TRACE else None
    return MixednessReport(
        purity_in=purity_in,
        purity_out=purity_out,
        purity_out_normalized=normalized,
        output_trace=tr,
        w_norm=operator_norm(p.conj().T @ p),
        contraction_holds=purity_out <= purity_in,
    )
