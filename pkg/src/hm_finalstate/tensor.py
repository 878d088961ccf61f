"""Dense complex linear algebra over labelled tensor factorizations.

Flat indices are big-endian in factor order: the first factor varies slowest.
All operators are plain ``numpy`` complex arrays; states and density operators
carry a :class:`HilbertLayout` so subsystem operations can be addressed by name.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CONSTRUCTION_TOL = 1e-12
SPECTRAL_TOL = 1e-10

# cap on entries of any kron result (~4 GiB of complex128)
MAX_ENTRIES = 1 << 28


class LayoutError(ValueError):
    """Unknown factor label or incompatible layouts."""


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered, named tensor factors, e.g. ``HilbertLayout([("M", 3), ("in", 3)])``."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(name), int(dim)) for name, dim in self.factors)
        names = [name for name, _ in factors]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate factor names in {names}")
        for name, dim in factors:
            if dim < 1:
                raise LayoutError(f"factor {name!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __len__(self):
        return len(self.factors)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"unknown factor {name!r}; layout has {list(self.names)}") from None

    def dim(self, name: str) -> int:
        return self.dims[self.axis(name)]

    def flatten(self, multi: Sequence[int]) -> int:
        if len(multi) != len(self.factors):
            raise LayoutError(f"multi-index {tuple(multi)} does not match {len(self)} factors")
        flat = 0
        for i, d in zip(multi, self.dims):
            if not 0 <= i < d:
                raise IndexError(f"index {i} out of range for dimension {d}")
            flat = flat * d + int(i)
        return flat

    def unflatten(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.total:
            raise IndexError(f"flat index {flat} out of range for total dimension {self.total}")
        out = []
        for d in reversed(self.dims):
            flat, r = divmod(flat, d)
            out.append(r)
        return tuple(reversed(out))

    def sub(self, names: Iterable[str]) -> "HilbertLayout":
        """Layout restricted to ``names``, kept in this layout's order."""
        wanted = set(names)
        for name in wanted:
            self.axis(name)
        return HilbertLayout(tuple(f for f in self.factors if f[0] in wanted))

    def without(self, names: Iterable[str]) -> "HilbertLayout":
        drop = set(names)
        for name in drop:
            self.axis(name)
        return HilbertLayout(tuple(f for f in self.factors if f[0] not in drop))

    def relabel(self, mapping: dict[str, str]) -> "HilbertLayout":
        return HilbertLayout(tuple((mapping.get(n, n), d) for n, d in self.factors))

    def __add__(self, other: "HilbertLayout") -> "HilbertLayout":
        return HilbertLayout(self.factors + other.factors)


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over a layout.

    ``normalized=False`` marks deliberately sub-normalized vectors (projection
    outputs). ``dual=True`` means the amplitudes are already bra coefficients,
    i.e. the object is ``sum_s amplitudes[s] <s|``.
    """

    layout: HilbertLayout
    amplitudes: np.ndarray
    normalized: bool = True
    dual: bool = False

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.layout.total:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for layout of total dimension {self.layout.total}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > CONSTRUCTION_TOL:
            raise ValueError(f"state flagged normalized has norm {np.linalg.norm(amps)!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def normalize(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes / self.norm, True, self.dual)

    def density(self) -> "DensityOperator":
        a = self.amplitudes.conj() if self.dual else self.amplitudes
        return DensityOperator(self.layout, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian PSD operator with 0 < trace <= 1 (sub-normalized allowed)."""

    layout: HilbertLayout
    matrix: np.ndarray
    trace: float = field(init=False)

    def __post_init__(self):
        m = as_matrix(self.matrix).copy()
        d = self.layout.total
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match layout dimension {d}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > CONSTRUCTION_TOL:
            raise NotHermitianError("density operator is not Hermitian")
        tr = float(np.trace(m).real)
        if not 0.0 < tr <= 1.0 + CONSTRUCTION_TOL:
            raise ValueError(f"density operator trace {tr!r} outside (0, 1]")
        if np.linalg.eigvalsh(m)[0] < -SPECTRAL_TOL:
            raise ValueError("density operator has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "trace", tr)

    @property
    def subnormalized(self) -> bool:
        return self.trace < 1.0 - CONSTRUCTION_TOL

    def normalized(self) -> "DensityOperator":
        return DensityOperator(self.layout, self.matrix / self.trace)


def kron(a, b) -> np.ndarray:
    """Kronecker product; entry ``(i*rb + k, j*cb + l)`` is ``a[i, j] * b[k, l]``."""
    a, b = as_matrix(a), as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_ENTRIES:
        raise DimensionError(f"kron result {rows}x{cols} exceeds {MAX_ENTRIES} entries")
    return np.kron(a, b)


def tensor_states(*states: StateVector) -> StateVector:
    """Product ket; layouts are concatenated in argument order."""
    layout = HilbertLayout(())
    amps = np.ones(1, dtype=complex)
    normalized = True
    for s in states:
        layout = layout + s.layout
        amps = np.kron(amps, s.amplitudes)
        normalized = normalized and s.normalized
    return StateVector(layout, amps, normalized=normalized)


def permute_state(state: StateVector, order: Sequence[str]) -> StateVector:
    """Reorder the factors of ``state`` to ``order``."""
    axes = [state.layout.axis(name) for name in order]
    if len(axes) != len(state.layout):
        raise LayoutError(f"order {list(order)} is not a permutation of {list(state.layout.names)}")
    layout = HilbertLayout(tuple(state.layout.factors[i] for i in axes))
    amps = np.transpose(state.tensor(), axes).reshape(-1)
    return StateVector(layout, amps, state.normalized, state.dual)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    keep = set(keep)
    layout = rho.layout
    kept = layout.sub(keep)
    if len(kept) == len(layout):
        return DensityOperator(layout, rho.matrix.copy())
    t = rho.matrix.reshape(layout.dims + layout.dims)
    # einsum subscripts: traced factors share one letter between row and column
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    row, col, out_row, out_col = [], [], [], []
    for name in layout.names:
        r = next(letters)
        if name in keep:
            c = next(letters)
            out_row.append(r)
            out_col.append(c)
        else:
            c = r
        row.append(r)
        col.append(c)
    subs = "".join(row + col) + "->" + "".join(out_row + out_col)
    reduced = np.einsum(subs, t).reshape(kept.total, kept.total)
    return DensityOperator(kept, reduced)


def reduced_density(state: StateVector, keep: Iterable[str]) -> DensityOperator:
    """Reduced density operator of a ket without forming the full projector."""
    keep = set(keep)
    kept = state.layout.sub(keep)
    traced = [name for name in state.layout.names if name not in keep]
    s = permute_state(state, list(kept.names) + traced)
    a = s.amplitudes.reshape(kept.total, -1)
    return DensityOperator(kept, a @ a.conj().T)


def partial_transpose(rho: DensityOperator | np.ndarray, factor: str,
                      layout: HilbertLayout | None = None) -> np.ndarray:
    """Transpose the indices of one named factor.

    Accepts a :class:`DensityOperator` or a bare matrix together with its layout.
    """
    if isinstance(rho, DensityOperator):
        layout, m = rho.layout, rho.matrix
    else:
        if layout is None:
            raise LayoutError("a bare matrix needs an explicit layout")
        m = as_matrix(rho)
    k = layout.axis(factor)
    n = len(layout)
    t = m.reshape(layout.dims + layout.dims)
    t = np.swapaxes(t, k, n + k)
    return t.reshape(layout.total, layout.total)


def _check_hermitian(h: np.ndarray) -> None:
    if h.shape[0] != h.shape[1]:
        raise NotHermitianError(f"non-square matrix {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - h.conj().T), initial=0.0) > SPECTRAL_TOL * scale:
        raise NotHermitianError("matrix is not Hermitian within tolerance")


def hermitian_eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and matching orthonormal eigenvectors (columns)."""
    h = as_matrix(h)
    _check_hermitian(h)
    return np.linalg.eigh(h)


def hermitian_eigenvalues(h) -> np.ndarray:
    h = as_matrix(h)
    _check_hermitian(h)
    return np.linalg.eigvalsh(h)


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(V, D, W)`` with ``V @ D @ W == m``; ``D`` diagonal, descending."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"svd expects a square matrix, got {m.shape}")
    v, s, w = np.linalg.svd(m)
    return v, np.diag(s).astype(complex), w


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def operator_norm(m) -> float:
    return float(singular_values(m)[0])


def partial_inner_product(bra: StateVector, ket: StateVector) -> StateVector:
    """Contract ``bra`` against the matching factors of ``ket``.

    Amplitude for a complement index ``c`` is ``sum_s conj(bra[s]) * ket[s, c]``,
    where ``bra`` is read as a ket unless it is flagged ``dual``. The result is
    flagged as sub-normalized.
    """
    for name, dim in bra.layout.factors:
        if ket.layout.dim(name) != dim:
            raise LayoutError(
                f"factor {name!r} has dimension {dim} in bra but {ket.layout.dim(name)} in ket"
            )
    rest = ket.layout.without(bra.layout.names)
    k = permute_state(ket, list(bra.layout.names) + list(rest.names))
    coef = bra.amplitudes if bra.dual else bra.amplitudes.conj()
    out = coef @ k.amplitudes.reshape(bra.layout.total, rest.total)
    return StateVector(rest, out, normalized=False)


def basis_state(layout: HilbertLayout, *index: int) -> StateVector:
    amps = np.zeros(layout.total, dtype=complex)
    amps[layout.flatten(index)] = 1.0
    return StateVector(layout, amps)
