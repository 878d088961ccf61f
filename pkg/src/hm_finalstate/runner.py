"""Seeded ensemble sweeps for every analysis in the package.

Each trial draws from its own stream, ``(seed, stream_id(n, trial))``, so any
row of a report can be recomputed in isolation with :func:`run_trial`.
"""
from __future__ import annotations

import datetime
import logging
import math
import platform
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import entanglement as ent
from .config import ExperimentConfig
from .evaporation import evaporate_density, mixedness_report
from .fidelity import (
    fidelity_bound_report,
    m_tensor_analytic,
    m_tensor_mc,
    mean_fidelity_contracted,
    mean_fidelity_mc,
    postselected_fidelity_mc,
)
from .report import ExperimentReport, aggregate, emit
from .states import (
    BoundaryUnitary,
    RngStream,
    haar_state,
    haar_unitary_matrix,
    normalized_nonunitary,
    random_mixed_state,
)
from .tensor import SPECTRAL_TOL, StateVector, hermitian_eigenvalues

log = logging.getLogger(__name__)

Z_LIMIT = 5.0
EXACT_TOL = 1e-12
THIRTEEN_TWELFTHS = 13.0 / 12.0
# fewer trials make the sample standard error too unreliable for a z test
MIN_TRIALS_FOR_Z = 30


def stream_id(n: int, trial: int) -> int:
    return (n << 32) | trial


def draw_unitary(ensemble: str, n: int, gen: np.random.Generator) -> BoundaryUnitary:
    if ensemble == "haar":
        return BoundaryUnitary(haar_unitary_matrix(n, gen))
    if ensemble == "identity":
        return BoundaryUnitary.identity(n)
    if ensemble == "permutation":
        return BoundaryUnitary.cyclic_shift(n)
    if ensemble == "normalized-nonunitary":
        return normalized_nonunitary(n, gen)
    raise ValueError(f"unknown ensemble {ensemble!r}")


def _invariant(flags) -> dict:
    flags = [bool(f) for f in flags]
    bad = flags.count(False)
    return {"checked": len(flags), "violations": bad, "passed": bad == 0}


def _finite(rows, key):
    return [r[key] for r in rows if r[key] is not None and math.isfinite(r[key])]


# --- mixedness -------------------------------------------------------------

MIXEDNESS_COLUMNS = [
    "n", "trial", "stream_id", "is_unitary", "rank", "purity_in", "purity_out",
    "purity_out_normalized", "output_trace", "w_norm", "w_norm_expected",
    "w_norm_error", "contraction_holds", "pure_output_rank", "pure_output_purity_normalized",
]


def mixedness_trial(n: int, gen: np.random.Generator, cfg: ExperimentConfig) -> dict:
    u = draw_unitary(cfg.unitary_ensemble, n, gen)
    rank = int(gen.integers(1, n + 1))
    rho = random_mixed_state(n, rank, gen)
    rep = mixedness_report(rho, u)
    expected = 1.0 / n**2 if u.is_unitary else math.nan
    phi = haar_state(n, gen)
    out = evaporate_density(phi.density(), u)
    eig = hermitian_eigenvalues(out.matrix)
    return {
        "is_unitary": u.is_unitary,
        "rank": rank,
        "purity_in": rep.purity_in,
        "purity_out": rep.purity_out,
        "purity_out_normalized": rep.purity_out_normalized,
        "output_trace": rep.output_trace,
        "w_norm": rep.w_norm,
        "w_norm_expected": expected,
        "w_norm_error": abs(rep.w_norm - expected),
        "contraction_holds": rep.contraction_holds,
        "pure_output_rank": int(np.sum(eig > SPECTRAL_TOL)),
        "pure_output_purity_normalized": float(np.sum(eig**2) / np.sum(eig) ** 2),
    }


def mixedness_checks(rows: list[dict], cfg: ExperimentConfig) -> tuple[dict, dict]:
    invariants = {
        "purity_contraction": _invariant(r["contraction_holds"] for r in rows),
        "pure_to_pure": _invariant(r["pure_output_rank"] == 1 for r in rows),
        "w_norm_unitary": _invariant(e <= EXACT_TOL for e in _finite(rows, "w_norm_error")),
    }
    ratios = [r["purity_out"] / r["purity_in"] for r in rows]
    discrepancies = {
        "w_norm_claimed_sup": {
            "claimed": 1.0,
            "measured_max": max(r["w_norm"] for r in rows),
        },
        "purity_ratio_out_over_in": {"max": max(ratios), "min": min(ratios)},
    }
    return invariants, discrepancies


# --- mean fidelity -----------------------------------------------------------

MEAN_FIDELITY_COLUMNS = [
    "n", "trial", "stream_id", "is_unitary", "trace_abs", "singular_value_sum",
    "mean_fidelity_closed", "mean_fidelity_contracted", "mean_fidelity_mc", "mc_std_error",
    "mc_z", "postselected_fidelity_mc", "postselected_std_error", "teleportation_fidelity",
    "fidelity_bound", "fidelity_bound_holds", "trace_bound_holds", "sharp_trace_bound_holds",
]


def mean_fidelity_trial(n: int, gen: np.random.Generator, cfg: ExperimentConfig) -> dict:
    u = draw_unitary(cfg.unitary_ensemble, n, gen)
    rep = fidelity_bound_report(u)
    row = {
        "is_unitary": u.is_unitary,
        "trace_abs": rep.trace_abs,
        "singular_value_sum": rep.singular_value_sum,
        "mean_fidelity_closed": rep.mean_fidelity,
        "mean_fidelity_contracted": mean_fidelity_contracted(u),
        "mean_fidelity_mc": math.nan,
        "mc_std_error": math.nan,
        "mc_z": math.nan,
        "postselected_fidelity_mc": math.nan,
        "postselected_std_error": math.nan,
        "teleportation_fidelity": rep.teleportation_fidelity,
        "fidelity_bound": rep.fidelity_bound,
        "fidelity_bound_holds": rep.fidelity_bound_holds,
        "trace_bound_holds": rep.trace_bound_holds,
        "sharp_trace_bound_holds": rep.sharp_trace_bound_holds,
    }
    if cfg.mc_samples > 0:
        est = mean_fidelity_mc(u, cfg.mc_samples, gen)
        post = postselected_fidelity_mc(u, cfg.mc_samples, gen)
        row.update(
            mean_fidelity_mc=est.mean,
            mc_std_error=est.std_error,
            mc_z=est.z_score(rep.mean_fidelity),
            postselected_fidelity_mc=post.mean,
            postselected_std_error=post.std_error,
        )
    return row


def mean_fidelity_checks(rows: list[dict], cfg: ExperimentConfig) -> tuple[dict, dict]:
    invariants = {
        "fidelity_bound": _invariant(r["fidelity_bound_holds"] for r in rows),
        "trace_bound": _invariant(r["trace_bound_holds"] for r in rows),
        "sharp_trace_bound": _invariant(r["sharp_trace_bound_holds"] for r in rows),
        "closed_vs_contracted": _invariant(
            abs(r["mean_fidelity_closed"] - r["mean_fidelity_contracted"]) <= EXACT_TOL for r in rows
        ),
    }
    if cfg.mc_samples > 0:
        invariants["mc_agreement"] = _invariant(abs(r["mc_z"]) <= Z_LIMIT for r in rows)
    discrepancies = {
        "mc_vs_closed_form": {
            "max_abs_z": max((abs(z) for z in _finite(rows, "mc_z")), default=None),
        },
        "bound_slack": {
            "min_ratio_mean_over_bound": min(
                r["mean_fidelity_closed"] / r["fidelity_bound"] for r in rows
            ),
        },
    }
    return invariants, discrepancies


# --- averaged operator check -----------------------------------------------------

MLM_COLUMNS = [
    "n", "trial", "stream_id", "m00_00_mc", "m00_00_std_error", "m00_00_expected", "m00_00_z",
    "m00_11_mc", "m00_11_std_error", "m00_11_expected", "m00_11_z", "max_abs_z_all_entries",
]


def mlm_trial(n: int, gen: np.random.Generator, cfg: ExperimentConfig) -> dict:
    est = m_tensor_mc(n, cfg.mc_samples, gen)
    exact = m_tensor_analytic(n)
    row = {"max_abs_z_all_entries": est.max_z(exact)}
    for key, idx in (("m00_00", (0, 0, 0, 0)), ("m00_11", (0, 0, 1, 1))):
        if max(idx) >= n:
            row.update({f"{key}_{s}": math.nan for s in ("mc", "std_error", "expected", "z")})
            continue
        mean = float(est.mean[idx].real)
        se = float(est.std_error_real[idx])
        expected = float(exact[idx].real)
        row.update({
            f"{key}_mc": mean,
            f"{key}_std_error": se,
            f"{key}_expected": expected,
            f"{key}_z": (mean - expected) / se if se > 0 else 0.0,
        })
    return row


def mlm_checks(rows: list[dict], cfg: ExperimentConfig) -> tuple[dict, dict]:
    invariants = {
        "diagonal_moment": _invariant(abs(z) <= Z_LIMIT for z in _finite(rows, "m00_00_z")),
        "off_diagonal_moment": _invariant(abs(z) <= Z_LIMIT for z in _finite(rows, "m00_11_z")),
        "full_operator": _invariant(r["max_abs_z_all_entries"] <= Z_LIMIT for r in rows),
    }
    discrepancies = {"max_abs_z": max(r["max_abs_z_all_entries"] for r in rows)}
    return invariants, discrepancies


# --- entanglement ----------------------------------------------------------------

ENTANGLEMENT_COLUMNS = [
    "n", "trial", "stream_id", "is_unitary", "f_norm_sq", "f_norm_sq_expected",
    "psi_norm_sq", "psi_norm_sq_closed", "closed_form_residual", "linearity_residual",
    "printed_state_residual", "printed_ratio_bob0", "printed_ratio_bob1",
    "survives_all_m", "min_pt_eigenvalue", "negativity", "pt_negative",
    "block_eig_residual", "block_trace_sum", "fidelity_direct", "fidelity_rederived",
    "fidelity_printed", "fidelity_printed_over_direct",
]


def _evaporated(n: int, u: BoundaryUnitary, phi: StateVector) -> StateVector:
    return ent.evaporate_alice_bob(ent.alice_bob_initial(n, phi), u)


def entanglement_trial(n: int, gen: np.random.Generator, cfg: ExperimentConfig) -> dict:
    u = draw_unitary(cfg.unitary_ensemble, n, gen)
    phi = haar_state(n, gen)
    x = ent.alice_bob_initial(n, phi)
    psi = ent.evaporate_alice_bob(x, u)
    f = ent.f_coefficients(u, phi)

    closed = ent.evaporated_closed_form(f)
    printed = ent.evaporated_printed(f)
    r0, r1 = ent.branch_ratios(psi, printed)

    # linearity in the matter state: evaporate a normalized superposition
    phi2 = haar_state(n, gen)
    a, b = 0.6, 0.8j
    mix = a * phi.amplitudes + b * phi2.amplitudes
    scale = np.linalg.norm(mix)
    combo = StateVector(phi.layout, mix / scale)
    lhs = _evaporated(n, u, combo).amplitudes * scale
    rhs = a * psi.amplitudes + b * _evaporated(n, u, phi2).amplitudes

    m = np.arange(n)
    psi_norm_closed = float(np.sum(np.abs(f.values) ** 2 * (0.5 + (m + 1) / (n + 1))))
    rho = ent.rho_ab(psi)
    pt = ent.pt_spectrum_full(rho)
    block_res = max(
        float(np.max(np.abs(np.sort(ent.pt_block_eigs_printed(f, k)) - ent.pt_block_eigs_numeric(f, k))))
        for k in range(n)
    )
    fid = ent.entanglement_fidelity_direct(x, psi)
    fid_printed = ent.entanglement_fidelity_printed(f)
    return {
        "is_unitary": u.is_unitary,
        "f_norm_sq": f.norm_sq,
        "f_norm_sq_expected": 1.0 / n**2 if u.is_unitary else math.nan,
        "psi_norm_sq": psi.norm_sq,
        "psi_norm_sq_closed": psi_norm_closed,
        "closed_form_residual": float(np.max(np.abs(psi.amplitudes - closed.amplitudes))),
        "linearity_residual": float(np.max(np.abs(lhs - rhs))),
        "printed_state_residual": float(np.linalg.norm(psi.amplitudes - printed.amplitudes)),
        "printed_ratio_bob0": r0,
        "printed_ratio_bob1": r1,
        "survives_all_m": ent.survives_all(f),
        "min_pt_eigenvalue": float(pt[0]),
        "negativity": float(-pt[pt < 0].sum()),
        "pt_negative": bool(pt[0] < ent.NEGATIVE_TOL),
        "block_eig_residual": block_res,
        "block_trace_sum": ent.block_trace_sum(f),
        "fidelity_direct": fid,
        "fidelity_rederived": ent.entanglement_fidelity_rederived(f),
        "fidelity_printed": fid_printed,
        "fidelity_printed_over_direct": fid_printed / fid if fid > 0 else math.nan,
    }


def entanglement_checks(rows: list[dict], cfg: ExperimentConfig) -> tuple[dict, dict]:
    survivors = [r for r in rows if r["survives_all_m"]]
    failures = [r for r in rows if not r["survives_all_m"]]
    invariants = {
        "survival_implies_negative_pt": _invariant(r["pt_negative"] for r in survivors),
        "closed_form_state": _invariant(r["closed_form_residual"] <= EXACT_TOL for r in rows),
        "state_norm": _invariant(
            abs(r["psi_norm_sq"] - r["psi_norm_sq_closed"]) <= EXACT_TOL for r in rows
        ),
        "linearity": _invariant(r["linearity_residual"] <= EXACT_TOL for r in rows),
        "f_norm_unitary": _invariant(
            abs(r["f_norm_sq"] - r["f_norm_sq_expected"]) <= EXACT_TOL
            for r in rows if r["is_unitary"]
        ),
        "block_eigenvalues": _invariant(r["block_eig_residual"] <= EXACT_TOL for r in rows),
        "fidelity_rederived": _invariant(
            abs(r["fidelity_direct"] - r["fidelity_rederived"]) <= EXACT_TOL for r in rows
        ),
    }
    discrepancies = {
        "printed_evaporated_state": {
            "bob0_ratio_mean": float(np.nanmean([r["printed_ratio_bob0"] for r in rows])),
            "bob1_ratio_mean": float(np.nanmean([r["printed_ratio_bob1"] for r in rows])),
            "max_residual": max(r["printed_state_residual"] for r in rows),
        },
        "printed_entanglement_fidelity": {
            "ratio_mean": float(np.nanmean([r["fidelity_printed_over_direct"] for r in rows])),
        },
        "block_trace_bookkeeping": {
            "max_block_sum_minus_trace": max(
                r["block_trace_sum"] - r["psi_norm_sq"] for r in rows
            ),
        },
        "survival_condition": {
            "trials": len(rows),
            "holds_all_m": len(survivors),
            "fails_some_m": len(failures),
            "negative_pt_given_holds": sum(r["pt_negative"] for r in survivors),
            "negative_pt_given_fails": sum(r["pt_negative"] for r in failures),
            "converse_rate": (
                sum(r["pt_negative"] for r in failures) / len(failures) if failures else None
            ),
        },
    }
    return invariants, discrepancies


# --- entanglement fidelity scaling --------------------------------------------------

SWEEP_COLUMNS = [
    "n", "trial", "stream_id", "fidelity_direct", "fidelity_rederived", "fidelity_printed",
    "n2_fidelity_direct", "n3_fidelity_direct", "n2_fidelity_printed",
]


def sweep_trial(n: int, gen: np.random.Generator, cfg: ExperimentConfig) -> dict:
    u = draw_unitary(cfg.unitary_ensemble, n, gen)
    phi = haar_state(n, gen)
    x = ent.alice_bob_initial(n, phi)
    psi = ent.evaporate_alice_bob(x, u)
    f = ent.f_coefficients(u, phi)
    fid = ent.entanglement_fidelity_direct(x, psi)
    printed = ent.entanglement_fidelity_printed(f)
    return {
        "fidelity_direct": fid,
        "fidelity_rederived": ent.entanglement_fidelity_rederived(f),
        "fidelity_printed": printed,
        "n2_fidelity_direct": n**2 * fid,
        "n3_fidelity_direct": n**3 * fid,
        "n2_fidelity_printed": n**2 * printed,
    }


def sweep_checks(rows: list[dict], cfg: ExperimentConfig) -> tuple[dict, dict]:
    invariants = {
        "fidelity_nonnegative": _invariant(r["fidelity_direct"] >= 0 for r in rows),
        "fidelity_rederived": _invariant(
            abs(r["fidelity_direct"] - r["fidelity_rederived"]) <= EXACT_TOL for r in rows
        ),
    }
    table = {}
    haar_flags = []
    for n in cfg.n_values:
        sub = [r for r in rows if r["n"] == n]
        n3 = np.array([r["n3_fidelity_direct"] for r in sub])
        expected = ent.haar_mean_scaled_fidelity(n)
        se = float(n3.std(ddof=1) / math.sqrt(n3.size)) if n3.size > 1 else None
        entry = {
            "target_13_over_12": THIRTEEN_TWELFTHS,
            "mean_n2_fidelity_direct": float(np.mean([r["n2_fidelity_direct"] for r in sub])),
            "mean_n2_fidelity_printed": float(np.mean([r["n2_fidelity_printed"] for r in sub])),
            "mean_n3_fidelity_direct": float(n3.mean()),
            "n3_std_error": se,
            "haar_expected_n3_fidelity": expected,
        }
        if se and n3.size >= MIN_TRIALS_FOR_Z:
            entry["n3_z"] = (entry["mean_n3_fidelity_direct"] - expected) / se
            haar_flags.append(abs(entry["n3_z"]) <= Z_LIMIT)
        table[str(n)] = entry
    if cfg.unitary_ensemble == "haar" and haar_flags:
        invariants["haar_mean_scaling"] = _invariant(haar_flags)
    return invariants, {"entanglement_fidelity_scaling": table}


EXPERIMENTS: dict[str, tuple[list[str], Callable, Callable]] = {
    "mixedness": (MIXEDNESS_COLUMNS, mixedness_trial, mixedness_checks),
    "mean-fidelity": (MEAN_FIDELITY_COLUMNS, mean_fidelity_trial, mean_fidelity_checks),
    "mlm-check": (MLM_COLUMNS, mlm_trial, mlm_checks),
    "entanglement": (ENTANGLEMENT_COLUMNS, entanglement_trial, entanglement_checks),
    "sweep": (SWEEP_COLUMNS, sweep_trial, sweep_checks),
}


def run_trial(cfg: ExperimentConfig, n: int, trial: int) -> dict:
    _, trial_fn, _ = EXPERIMENTS[cfg.experiment]
    sid = stream_id(n, trial)
    gen = RngStream(cfg.seed, sid).generator()
    return {"n": n, "trial": trial, "stream_id": sid, **trial_fn(n, gen, cfg)}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every ``(n, trial)`` pair, evaluate invariants, and write the report if asked."""
    columns, _, checks = EXPERIMENTS[cfg.experiment]
    rows = []
    for n in cfg.n_values:
        log.info("%s: n=%d, %d trials", cfg.experiment, n, cfg.trials)
        rows.extend(run_trial(cfg, n, t) for t in range(cfg.trials))
    invariants, discrepancies = checks(rows, cfg)
    report = ExperimentReport(
        config=cfg.as_dict(),
        columns=list(columns),
        trials=rows,
        aggregates={str(n): aggregate([r for r in rows if r["n"] == n], columns)
                    for n in cfg.n_values},
        discrepancies=discrepancies,
        invariants=invariants,
        metadata={
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "host": platform.node(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "version": __version__,
        },
    )
    if cfg.output_path:
        Path(cfg.output_path).write_bytes(emit(report, cfg.output_format))
    return report
