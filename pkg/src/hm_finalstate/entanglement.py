"""Alice-Bob entanglement through evaporation.

Alice's in/out modes start in a superposition of the Unruh vacuum and its
one-particle excitation, correlated with Bob's qubit. The matter and Alice's
interior mode are then projected onto the final boundary state. Every printed
closed form here has a direct-computation counterpart. The direct one is
normative; the printed ones are kept for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import BoundaryUnitary, final_boundary_bra, unruh_excited, unruh_vacuum
from .tensor import (
    SPECTRAL_TOL,
    DensityOperator,
    HilbertLayout,
    LayoutError,
    StateVector,
    hermitian_eigenvalues,
    partial_inner_product,
    partial_transpose,
    reduced_density,
    tensor_states,
)

NEGATIVE_TOL = -SPECTRAL_TOL


def alice_bob_layout(n: int) -> HilbertLayout:
    return HilbertLayout((("M", n), ("A_in", n), ("A_out", n + 1), ("B", 2)))


def evaporated_layout(n: int) -> HilbertLayout:
    return HilbertLayout((("A_out", n + 1), ("B", 2)))


@dataclass(frozen=True)
class FCoefficients:
    """Projected matter amplitudes ``f_m = (1/N) sum_l conj(U_lm) <l|phi>``.

    Out-of-range indices read as zero.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.shape != (self.n,):
            raise ValueError(f"expected {self.n} coefficients, got {v.shape[0]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, m: int) -> complex:
        return complex(self.values[m]) if 0 <= m < self.n else 0j

    def abs2(self, m: int) -> float:
        return abs(self[m]) ** 2

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


def f_coefficients(u: BoundaryUnitary, phi: StateVector) -> FCoefficients:
    if phi.layout.total != u.n:
        raise LayoutError(f"matter state of dimension {phi.layout.total} vs N={u.n}")
    return FCoefficients(u.n, u.matrix.conj().T @ phi.amplitudes / u.n)


def alice_bob_initial(n: int, phi: StateVector) -> StateVector:
    """``(|vac>|1>_B + |exc>|0>_B)/sqrt2`` tensored with the matter state, laid out M, A_in, A_out, B."""
    if not phi.normalized:
        raise ValueError("matter state must be normalized")
    if phi.layout.total != n:
        raise LayoutError(f"matter state of dimension {phi.layout.total} vs n={n}")
    vac = unruh_vacuum(n, out_dim=n + 1).tensor()
    exc = unruh_excited(n).tensor()
    branch = np.stack([exc, vac], axis=-1) / np.sqrt(2.0)  # last axis is Bob: [|0>, |1>]
    pair = StateVector(alice_bob_layout(n).without(["M"]), branch.reshape(-1))
    matter = StateVector(HilbertLayout((("M", n),)), phi.amplitudes)
    return tensor_states(matter, pair)


def evaporate_alice_bob(x: StateVector, u: BoundaryUnitary) -> StateVector:
    """Project matter and Alice's interior mode onto the final boundary state."""
    n = u.n
    if x.layout != alice_bob_layout(n):
        raise LayoutError(f"expected layout {alice_bob_layout(n).factors}, got {x.layout.factors}")
    bra = final_boundary_bra(u, labels=("M", "A_in"))
    return partial_inner_product(bra, x)


def evaporated_closed_form(f: FCoefficients) -> StateVector:
    """``sum_m f_m [|m>|1>/sqrt2 + sqrt((m+1)/(N+1)) |m+1>|0>]``.

    Obtained by expanding the projection term by term.
    """
    return _two_branch_state(f, 1.0 / np.sqrt(2.0))


def evaporated_printed(f: FCoefficients) -> StateVector:
    """Published closed form, with ``1/sqrt(N)`` weighting the ``|m>|1>`` branch."""
    return _two_branch_state(f, 1.0 / np.sqrt(f.n))


def _two_branch_state(f: FCoefficients, weight_one: float) -> StateVector:
    n = f.n
    m = np.arange(n)
    t = np.zeros((n + 1, 2), dtype=complex)
    t[m, 1] = weight_one * f.values
    t[m + 1, 0] = np.sqrt((m + 1) / (n + 1)) * f.values
    return StateVector(evaporated_layout(n), t.reshape(-1), normalized=False)


def branch_ratios(oracle: StateVector, printed: StateVector) -> tuple[float, float]:
    """Norm ratio oracle/printed on Bob's ``|0>`` and ``|1>`` branches."""
    a = oracle.tensor()
    b = printed.tensor()
    out = []
    for k in (0, 1):
        nb = np.linalg.norm(b[:, k])
        out.append(float(np.linalg.norm(a[:, k]) / nb) if nb > 0 else float("nan"))
    return out[0], out[1]


def entanglement_fidelity_direct(x: StateVector, psi_ab: StateVector) -> float:
    """``<psi| Tr_{M, A_in}(|X><X|) |psi>`` with the unnormalized evaporated state."""
    rho = reduced_density(x, psi_ab.layout.names)
    if rho.layout != psi_ab.layout:
        raise LayoutError("evaporated state and reduced initial state have different layouts")
    val = np.vdot(psi_ab.amplitudes, rho.matrix @ psi_ab.amplitudes)
    return float(val.real)


def entanglement_fidelity_rederived(f: FCoefficients) -> float:
    """Closed form of the direct trace: ``(1/N) sum_m |f_m|^2 (1/2 + (m+1)/(N+1))^2``."""
    n = f.n
    m = np.arange(n)
    w = (0.5 + (m + 1) / (n + 1)) ** 2
    return float(np.sum(np.abs(f.values) ** 2 * w) / n)


def entanglement_fidelity_printed(f: FCoefficients, n: int | None = None) -> float:
    """Published closed form; its bracket index is read as the summation index."""
    n = f.n if n is None else n
    m = np.arange(n)
    bracket = (m + 1) ** 2 + (m + 1) / (n + 1) + 1.0 / (4 * (n + 1) ** 2)
    return float(np.sum(np.abs(f.values) ** 2 * bracket) / (n * (n + 1) ** 2))


def haar_mean_scaled_fidelity(n: int) -> float:
    """Haar-average of ``N^3 F_e`` for unitary U: ``3/4 + (2N+1)/(6(N+1))``."""
    return 0.75 + (2 * n + 1) / (6 * (n + 1))


def rho_ab(psi_ab: StateVector) -> DensityOperator:
    return DensityOperator(psi_ab.layout, np.outer(psi_ab.amplitudes, psi_ab.amplitudes.conj()))


def _check_block_index(f: FCoefficients, m: int) -> None:
    if not 0 <= m < f.n:
        raise IndexError(f"block index {m} outside [0, {f.n})")


def block_matrix_printed(f: FCoefficients, m: int) -> np.ndarray:
    """Published 4x4 block in the basis ``|m0>, |m1>, |(m+1)0>, |(m+1)1>``."""
    _check_block_index(f, m)
    n = f.n
    fm = f.abs2(m)
    c = np.sqrt((m + 1) / (2 * (n + 1))) * fm
    b = np.zeros((4, 4), dtype=complex)
    b[0, 0] = m * f.abs2(m - 1) / (n + 1)
    b[1, 1] = fm / 2
    b[1, 2] = b[2, 1] = c
    b[2, 2] = (m + 1) * fm / (n + 1)
    b[3, 3] = f.abs2(m + 1) / 2
    return b


BLOCK_LAYOUT = HilbertLayout((("A", 2), ("B", 2)))


def pt_block_eigs_printed(f: FCoefficients, m: int) -> np.ndarray:
    """The four published partial-transpose eigenvalues, in printed order."""
    _check_block_index(f, m)
    n = f.n
    fm = f.abs2(m)
    a = f.abs2(m + 1) / 2
    d = m * f.abs2(m - 1) / (n + 1)
    root = np.sqrt((a - d) ** 2 + 2 * (m + 1) * fm**2 / (n + 1))
    return np.array([fm / 2, (m + 1) * fm / (n + 1), 0.5 * (a + d + root), 0.5 * (a + d - root)])


def pt_block_eigs_numeric(f: FCoefficients, m: int) -> np.ndarray:
    pt = partial_transpose(block_matrix_printed(f, m), "B", BLOCK_LAYOUT)
    return hermitian_eigenvalues(pt)


def block_trace_sum(f: FCoefficients) -> float:
    """Sum of the traces of all published blocks (shared basis vectors counted twice)."""
    return float(sum(np.trace(block_matrix_printed(f, m)).real for m in range(f.n)))


def _check_bipartite(rho: DensityOperator) -> None:
    if len(rho.layout) != 2 or rho.layout.names[1] != "B" or rho.layout.dim("B") != 2:
        raise LayoutError(f"expected a (A_out, B) layout with a qubit B, got {rho.layout.factors}")


def pt_spectrum_full(rho: DensityOperator) -> np.ndarray:
    _check_bipartite(rho)
    return hermitian_eigenvalues(partial_transpose(rho, "B"))


def negativity(rho: DensityOperator) -> float:
    eig = pt_spectrum_full(rho)
    return float(-eig[eig < 0].sum())


def survival_condition(f: FCoefficients, m: int) -> bool:
    """``|f_m|^2 >= sqrt(m/(m+1)) |f_{m-1} f_{m+1}|``."""
    _check_block_index(f, m)
    return f.abs2(m) >= np.sqrt(m / (m + 1)) * abs(f[m - 1] * f[m + 1])


def survives_all(f: FCoefficients) -> bool:
    return all(survival_condition(f, m) for m in range(f.n))
