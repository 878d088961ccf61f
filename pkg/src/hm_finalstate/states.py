"""State constructors: Unruh vacuum and excitation, the final boundary state,
and the random ensembles used to exercise them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DensityOperator, HilbertLayout, StateVector, as_matrix

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Each call to :meth:`generator` restarts the stream from its beginning.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class BoundaryUnitary:
    """Square matrix defining the final boundary state.

    Only ``(1/N) * sum |U_jk|^2 == 1`` is required; ``is_unitary`` records
    whether the matrix is actually unitary.
    """

    matrix: np.ndarray
    is_unitary: bool = field(init=False)

    def __post_init__(self):
        m = as_matrix(self.matrix).copy()
        if m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"boundary matrix must be square, got {m.shape}")
        n = m.shape[0]
        norm = float(np.sum(np.abs(m) ** 2)) / n
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"(1/N) sum |U_jk|^2 = {norm!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        unitary = np.max(np.abs(m.conj().T @ m - np.eye(n))) <= NORMALIZATION_TOL
        object.__setattr__(self, "is_unitary", bool(unitary))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def rescaled(cls, matrix) -> "BoundaryUnitary":
        """Rescale an arbitrary nonzero matrix onto the normalization shell."""
        m = as_matrix(matrix)
        return cls(m * np.sqrt(m.shape[0] / np.sum(np.abs(m) ** 2)))

    @classmethod
    def identity(cls, n: int) -> "BoundaryUnitary":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def cyclic_shift(cls, n: int) -> "BoundaryUnitary":
        """Permutation ``|j> -> |j+1 mod n>``; traceless for n >= 2."""
        return cls(np.roll(np.eye(n, dtype=complex), 1, axis=0))


def unruh_vacuum(n: int, out_dim: int | None = None) -> StateVector:
    """Maximally entangled ``(1/sqrt N) sum_l |l>_in |l>_out``.

    With ``out_dim > n`` the state sits in the first ``n`` out levels.
    """
    out_dim = n if out_dim is None else out_dim
    if n < 1:
        raise ValueError("n must be >= 1")
    if out_dim < n:
        raise ValueError(f"out_dim={out_dim} is smaller than n={n}")
    t = np.zeros((n, out_dim), dtype=complex)
    t[np.arange(n), np.arange(n)] = 1.0 / np.sqrt(n)
    return StateVector(HilbertLayout((("in", n), ("out", out_dim))), t.reshape(-1))


def unruh_excited(n: int) -> StateVector:
    """One-particle excitation, ``sum_l sqrt(2(l+1)/(N(N+1))) |l>_in |l+1>_out``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    l = np.arange(n)
    t = np.zeros((n, n + 1), dtype=complex)
    t[l, l + 1] = np.sqrt(2.0 * (l + 1) / (n * (n + 1)))
    return StateVector(HilbertLayout((("in", n), ("out", n + 1))), t.reshape(-1))


def final_boundary_bra(u: BoundaryUnitary, labels: tuple[str, str] = ("M", "in")) -> StateVector:
    """Bra ``(1/sqrt N) sum_jk conj(U_jk) <j|_M <k|_in`` (flagged ``dual``)."""
    n = u.n
    layout = HilbertLayout(((labels[0], n), (labels[1], n)))
    return StateVector(layout, u.matrix.conj().reshape(-1) / np.sqrt(n), normalized=True, dual=True)


def boundary_matrix_from_bra(bra: StateVector) -> np.ndarray:
    """Invert :func:`final_boundary_bra`: ``U_jk = conj(sqrt(N) * coefficient_jk)``."""
    n = bra.layout.dims[0]
    coef = bra.amplitudes if bra.dual else bra.amplitudes.conj()
    return np.conj(np.sqrt(n) * coef).reshape(n, -1)


def haar_state(n: int, rng, name: str = "M") -> StateVector:
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return StateVector(HilbertLayout(((name, n),)), z / np.linalg.norm(z))


def haar_states(n: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random unit vectors as rows of a ``(count, n)`` array."""
    z = gen.standard_normal((count, n)) + 1j * gen.standard_normal((count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary_matrix(n: int, gen: np.random.Generator) -> np.ndarray:
    z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    # fix the QR phase ambiguity, otherwise the result is not Haar distributed
    return q * (d / np.abs(d))


def haar_unitary(n: int, rng) -> BoundaryUnitary:
    if n < 1:
        raise ValueError("n must be >= 1")
    return BoundaryUnitary(haar_unitary_matrix(n, as_generator(rng)))


def normalized_nonunitary(n: int, rng) -> BoundaryUnitary:
    """Complex Gaussian matrix rescaled to ``(1/N) sum |U_jk|^2 = 1``."""
    gen = as_generator(rng)
    z = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    return BoundaryUnitary.rescaled(z)


def random_mixed_state(n: int, rank: int, rng, weights=None) -> DensityOperator:
    """Density operator of the given rank with a Haar-random eigenbasis.

    Eigenvalues are uniform on the simplex unless ``weights`` is given.
    """
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} outside [1, {n}]")
    gen = as_generator(rng)
    if weights is None:
        w = gen.dirichlet(np.ones(rank))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (rank,) or np.any(w <= 0):
            raise ValueError("weights must be `rank` positive numbers")
        w = w / w.sum()
    v = haar_unitary_matrix(n, gen)[:, :rank]
    rho = (v * w) @ v.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(HilbertLayout((("M", n),)), rho)
