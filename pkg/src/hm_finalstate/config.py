"""Experiment configuration: flat ``key = value`` documents plus validation."""
from __future__ import annotations

import difflib
from dataclasses import asdict, dataclass
from typing import Any, Mapping

EXPERIMENTS = ("mixedness", "mean-fidelity", "mlm-check", "entanglement", "sweep")
ENSEMBLES = ("haar", "identity", "permutation", "normalized-nonunitary")
FORMATS = ("csv", "json")
MAX_N = 32
MIN_MC_SAMPLES = 1000
MAX_SEED = 2**64 - 1

DEFAULTS = {
    "trials": 100,
    "mc_samples": 100_000,
    "seed": 0,
    "unitary_ensemble": "haar",
    "output_format": "csv",
    "output_path": None,
}
KEYS = ("experiment", "n_values", *DEFAULTS)


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_values: tuple[int, ...]
    trials: int = 100
    mc_samples: int = 100_000
    seed: int = 0
    unitary_ensemble: str = "haar"
    output_format: str = "csv"
    output_path: str | None = None

    @property
    def uses_mc(self) -> bool:
        return self.experiment == "mlm-check" or (
            self.experiment == "mean-fidelity" and self.mc_samples > 0
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d["n_values"] = list(self.n_values)
        return d


def parse_n_values(value: Any) -> list[int]:
    """Accept ``[2, 3]``, ``"2,3,4"``, ``"2..6"`` or mixtures like ``"2..4,8"``."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            out.extend(parse_n_values(v))
        return out
    text = str(value).strip().strip("[]")
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return raw


def _int(raw: Mapping, key: str) -> int:
    value = raw[key]
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, str):
            s = value.replace("_", "")
            try:
                return int(s)
            except ValueError:
                # allow 1e5 style counts
                f = float(s)
                if not f.is_integer():
                    raise
                return int(f)
        if isinstance(value, float) and not value.is_integer():
            raise ValueError
        return int(value)
    except (TypeError, ValueError, OverflowError):
        raise ConfigError(key, f"expected an integer, got {value!r}") from None


def _choice(raw: Mapping, key: str, options: tuple[str, ...]) -> str:
    value = str(raw[key]).strip()
    if value not in options:
        raise ConfigError(key, f"{value!r} is not one of {list(options)}")
    return value


def validate_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    raw = {str(k).replace("-", "_"): v for k, v in raw.items() if v is not None}
    for key in raw:
        if key not in KEYS:
            hint = difflib.get_close_matches(key, KEYS, n=1, cutoff=0.5)
            suggestion = f" (did you mean {hint[0]!r}?)" if hint else ""
            raise ConfigError(key, f"unknown key{suggestion}; valid keys are {list(KEYS)}")
    for key in ("experiment", "n_values"):
        if key not in raw:
            raise ConfigError(key, "required")
    merged = {**DEFAULTS, **raw}

    experiment = _choice(merged, "experiment", EXPERIMENTS)
    try:
        n_values = parse_n_values(merged["n_values"])
    except ValueError:
        raise ConfigError("n_values", f"cannot parse {merged['n_values']!r}") from None
    if not n_values:
        raise ConfigError("n_values", "empty")
    for n in n_values:
        if not 1 <= n <= MAX_N:
            raise ConfigError("n_values", f"{n} outside [1, {MAX_N}]")

    trials = _int(merged, "trials")
    if trials < 1:
        raise ConfigError("trials", f"{trials} < 1")
    mc = _int(merged, "mc_samples")
    if mc < 0:
        raise ConfigError("mc_samples", f"{mc} < 0")
    if experiment == "mlm-check" and mc < MIN_MC_SAMPLES:
        raise ConfigError("mc_samples", f"{mc} < {MIN_MC_SAMPLES}")
    if experiment == "mean-fidelity" and 0 < mc < MIN_MC_SAMPLES:
        raise ConfigError("mc_samples", f"{mc} < {MIN_MC_SAMPLES} (use 0 to skip Monte Carlo)")
    seed = _int(merged, "seed")
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError("seed", f"{seed} outside [0, 2^64 - 1]")

    out = merged["output_path"]
    return ExperimentConfig(
        experiment=experiment,
        n_values=tuple(n_values),
        trials=trials,
        mc_samples=mc,
        seed=seed,
        unitary_ensemble=_choice(merged, "unitary_ensemble", ENSEMBLES),
        output_format=_choice(merged, "output_format", FORMATS),
        output_path=None if out in (None, "") else str(out),
    )
