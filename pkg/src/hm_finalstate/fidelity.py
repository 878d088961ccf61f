"""Mean fidelity of evaporation and the Haar-averaged operators behind it."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .evaporation import transfer_operator
from .states import BoundaryUnitary, as_generator, haar_states
from .tensor import singular_values

MIN_MC_SAMPLES = 1000
BOUND_RTOL = 1e-12
_CHUNK = 4096


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("an MC estimate needs at least 2 samples")

    @classmethod
    def from_values(cls, values) -> "MCEstimate":
        v = np.asarray(values, dtype=float)
        return cls(float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size)), int(v.size))

    def z_score(self, expected: float) -> float:
        diff = self.mean - expected
        # constant integrands leave only rounding noise in std_error
        scale = max(self.std_error, 16 * np.finfo(float).eps * abs(expected))
        if scale == 0.0:
            return 0.0 if diff == 0.0 else float("inf")
        return diff / scale


@dataclass(frozen=True)
class MatrixEstimate:
    """Entrywise MC estimate of a complex matrix (or tensor)."""

    mean: np.ndarray
    std_error_real: np.ndarray
    std_error_imag: np.ndarray
    samples: int

    def max_z(self, expected, floor: float = 1e-15) -> float:
        """Largest deviation from ``expected`` in units of standard error.

        ``floor`` guards entries whose sampled values are identically real.
        """
        d = self.mean - np.asarray(expected)
        zr = np.abs(d.real) / np.maximum(self.std_error_real, floor)
        zi = np.abs(d.imag) / np.maximum(self.std_error_imag, floor)
        return float(max(zr.max(), zi.max()))


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for dimension {n}")


def m_operator_analytic(l: int, m: int, n: int) -> np.ndarray:
    """Haar average of ``<m|phi><phi|l> |phi><phi|``: ``(delta_lm I + |l><m|) / (N(N+1))``."""
    _check_index(l, n)
    _check_index(m, n)
    out = np.zeros((n, n), dtype=complex)
    if l == m:
        out += np.eye(n)
    out[l, m] += 1.0
    return out / (n * (n + 1))


def m_tensor_analytic(n: int) -> np.ndarray:
    """All operators at once, indexed ``[l, m, i, j]``."""
    t = np.zeros((n, n, n, n), dtype=complex)
    for l in range(n):
        for m in range(n):
            t[l, m] = m_operator_analytic(l, m, n)
    return t


def m_tensor_mc(n: int, samples: int, rng) -> MatrixEstimate:
    """MC estimate of every averaged operator, indexed ``[l, m, i, j]``."""
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    gen = as_generator(rng)
    shape = (n, n, n, n)
    s1 = np.zeros(shape, dtype=complex)
    s2r = np.zeros(shape)
    s2i = np.zeros(shape)
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        phi = haar_states(n, k, gen)
        # <m|phi><phi|l> indexed [s, l, m] and |phi><phi| indexed [s, i, j]
        a = np.einsum("sl,sm->slm", phi.conj(), phi)
        b = np.einsum("si,sj->sij", phi, phi.conj())
        v = a[:, :, :, None, None] * b[:, None, None, :, :]
        s1 += v.sum(axis=0)
        s2r += (v.real ** 2).sum(axis=0)
        s2i += (v.imag ** 2).sum(axis=0)
        done += k
    mean = s1 / samples
    var_r = np.maximum(s2r - samples * mean.real ** 2, 0.0) / (samples - 1)
    var_i = np.maximum(s2i - samples * mean.imag ** 2, 0.0) / (samples - 1)
    return MatrixEstimate(mean, np.sqrt(var_r / samples), np.sqrt(var_i / samples), samples)


def m_operator_mc(l: int, m: int, n: int, samples: int, rng) -> tuple[np.ndarray, MatrixEstimate]:
    _check_index(l, n)
    _check_index(m, n)
    t = m_tensor_mc(n, samples, rng)
    est = MatrixEstimate(t.mean[l, m], t.std_error_real[l, m], t.std_error_imag[l, m], samples)
    return est.mean, est


def mean_fidelity_closed(u: BoundaryUnitary) -> float:
    n = u.n
    tr = np.trace(u.matrix)
    return float((1.0 / (n + 1) + abs(tr) ** 2 / (n * (n + 1))) / n**2)


def mean_fidelity_contracted(u: BoundaryUnitary) -> float:
    """Mean fidelity from contracting ``U`` with the analytic averaged operators.

    Uses ``(1/N^2) sum U_lm conj(U_jk) <j|M_lm|k>``, with no use of the
    normalization condition.
    """
    n = u.n
    t = m_tensor_analytic(n)
    val = np.einsum("lm,jk,lmjk->", u.matrix, u.matrix.conj(), t) / n**2
    return float(val.real)


def _overlaps(u: BoundaryUnitary, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = transfer_operator(u)
    out = phi @ p.T
    overlap = np.einsum("si,si->s", out.conj(), phi)
    return np.abs(overlap) ** 2, np.sum(np.abs(out) ** 2, axis=1)


def mean_fidelity_mc(u: BoundaryUnitary, samples: int, rng) -> MCEstimate:
    """MC average of ``|<phi~|phi>|^2`` with the unnormalized evaporated state."""
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    phi = haar_states(u.n, samples, as_generator(rng))
    fid, _ = _overlaps(u, phi)
    return MCEstimate.from_values(fid)


def postselected_fidelity_mc(u: BoundaryUnitary, samples: int, rng) -> MCEstimate:
    """MC average of ``|<phi~|phi>|^2 / <phi~|phi~>`` (fidelity given evaporation)."""
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    phi = haar_states(u.n, samples, as_generator(rng))
    fid, prob = _overlaps(u, phi)
    ok = prob > 0
    return MCEstimate.from_values(fid[ok] / prob[ok])


def teleportation_fidelity(u: BoundaryUnitary) -> float:
    lam = singular_values(u.matrix)
    return float((1.0 + lam.sum() ** 2) / (u.n + 1))


def _le(a: float, b: float) -> bool:
    return a <= b + BOUND_RTOL * max(abs(b), 1.0)


@dataclass(frozen=True)
class FidelityBoundReport:
    mean_fidelity: float
    teleportation_fidelity: float
    fidelity_bound: float
    fidelity_bound_holds: bool
    trace_abs: float
    singular_value_sum: float
    trace_bound_holds: bool
    sharp_trace_bound_holds: bool

    def as_dict(self) -> dict:
        return asdict(self)


def fidelity_bound_report(u: BoundaryUnitary) -> FidelityBoundReport:
    n = u.n
    f_ev = mean_fidelity_closed(u)
    f_qr = teleportation_fidelity(u)
    tr = float(abs(np.trace(u.matrix)))
    lam_sum = float(singular_values(u.matrix).sum())
    return FidelityBoundReport(
        mean_fidelity=f_ev,
        teleportation_fidelity=f_qr,
        fidelity_bound=f_qr / n**2,
        fidelity_bound_holds=_le(f_ev, f_qr / n**2),
        trace_abs=tr,
        singular_value_sum=lam_sum,
        trace_bound_holds=_le(tr, n * lam_sum),
        sharp_trace_bound_holds=_le(tr, lam_sum),
    )
