"""Configuration schema, strict validation, and resolved-config output.

Configs are plain JSON.  Unknown keys are rejected at every level so a
typo fails loudly instead of silently running with a default.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .radon import NORM_KINDS, NormEstimationSettings
from .training import TrainingSettings


class ConfigError(ValueError):
    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass(frozen=True)
class ApproxRateSettings:
    """Sweep for the sup-norm approximation-rate run."""
    d: int = 3
    neuron_grid: tuple = (16, 64, 256, 1024)
    trials: int = 20
    atoms: int = 200
    total_variation: float = 1.0
    probe_points: int = 20000


@dataclass(frozen=True)
class HorizonApproxSettings:
    """Sweep for the horizon disagreement-rate run."""
    d: int = 3
    neuron_grid: tuple = (16, 64, 256)
    trials: int = 10
    atoms: int = 150
    total_variation: float = 1.0
    probe_points: int = 200000


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple = (2, 3, 4)
    norms: tuple = NORM_KINDS
    sample_sizes: tuple = (250, 500, 1000, 2000, 4000)
    trials: int = 5
    tau: float = 1.0
    master_seed: int = 12345
    training: TrainingSettings = field(default_factory=TrainingSettings)
    norm_estimation: NormEstimationSettings = field(default_factory=NormEstimationSettings)
    approx_rate: ApproxRateSettings = field(default_factory=ApproxRateSettings)
    horizon_approx: HorizonApproxSettings = field(default_factory=HorizonApproxSettings)


def _check_keys(block: dict, allowed, where: str, errors: list) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        errors.append(f"{where}: unknown keys {unknown}")


def _get_int(block, key, where, errors, lo=None, hi=None):
    if key not in block:
        return None
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{where}.{key}: expected an integer, got {v!r}")
        return None
    if isinstance(v, float):
        if not v.is_integer():
            errors.append(f"{where}.{key}: expected an integer, got {v!r}")
            return None
        v = int(v)
    if lo is not None and v < lo:
        errors.append(f"{where}.{key}: must be >= {lo}, got {v}")
        return None
    if hi is not None and v > hi:
        errors.append(f"{where}.{key}: must be <= {hi}, got {v}")
        return None
    return v


def _get_float(block, key, where, errors, lo=None, lo_strict=None, hi=None):
    if key not in block:
        return None
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{where}.{key}: expected a number, got {v!r}")
        return None
    v = float(v)
    if lo is not None and v < lo:
        errors.append(f"{where}.{key}: must be >= {lo}, got {v}")
        return None
    if lo_strict is not None and v <= lo_strict:
        errors.append(f"{where}.{key}: must be > {lo_strict}, got {v}")
        return None
    if hi is not None and v > hi:
        errors.append(f"{where}.{key}: must be <= {hi}, got {v}")
        return None
    return v


def _int_list(block, key, where, errors, lo, allowed=None):
    if key not in block:
        return None
    raw = block[key]
    if not isinstance(raw, (list, tuple)) or not raw:
        errors.append(f"{where}.{key}: expected a nonempty list")
        return None
    vals = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or \
                (isinstance(v, float) and not v.is_integer()):
            errors.append(f"{where}.{key}[{i}]: expected an integer, got {v!r}")
            return None
        v = int(v)
        if v < lo:
            errors.append(f"{where}.{key}[{i}]: must be >= {lo}, got {v}")
            return None
        if allowed is not None and v not in allowed:
            errors.append(f"{where}.{key}[{i}]: {v} not in {sorted(allowed)}")
            return None
        vals.append(v)
    return tuple(sorted(set(vals)))


def _sub_block(raw, key, errors):
    if key not in raw:
        return {}
    block = raw[key]
    if not isinstance(block, dict):
        errors.append(f"{key}: expected an object")
        return {}
    return block


def _build(cls, block, where, errors, int_fields, float_fields, extra=None):
    """Collect overrides for a settings dataclass from one config block."""
    names = {f.name for f in dataclasses.fields(cls)}
    _check_keys(block, names, where, errors)
    kwargs = {}
    for key, (lo, hi) in int_fields.items():
        v = _get_int(block, key, where, errors, lo=lo, hi=hi)
        if v is not None:
            kwargs[key] = v
    for key, bounds in float_fields.items():
        v = _get_float(block, key, where, errors, **bounds)
        if v is not None:
            kwargs[key] = v
    if extra:
        kwargs.update(extra(block, where, errors))
    return cls(**kwargs)


def _training_from(block, errors) -> TrainingSettings:
    return _build(TrainingSettings, block, "training", errors,
                  int_fields={"epochs": (1, None), "batch_size": (1, None),
                              "restarts": (1, None)},
                  float_fields={"lr": {"lo_strict": 0.0},
                                "beta1": {"lo": 0.0, "hi": 1.0},
                                "beta2": {"lo": 0.0, "hi": 1.0},
                                "eps": {"lo_strict": 0.0}})


def _norm_est_from(block, errors) -> NormEstimationSettings:
    def extra(block, where, errs):
        out = {}
        if "mode" in block:
            mode = block["mode"]
            if mode not in ("none", "spectral"):
                errs.append(f"{where}.mode: expected 'none' or 'spectral', got {mode!r}")
            else:
                out["mode"] = mode
        if "sup_grid" in block and block["sup_grid"] is not None:
            v = _get_int(block, "sup_grid", where, errs, lo=32)
            if v is not None:
                out["sup_grid"] = v
        return out

    return _build(NormEstimationSettings, block, "norm_estimation", errors,
                  int_fields={"directions": (2, None), "offsets": (4, None),
                              "slice_samples": (1, None), "tv_grid": (16, None),
                              "seed": (0, None)},
                  float_fields={}, extra=extra)


def _approx_from(cls, block, where, errors):
    def extra(block, where, errs):
        out = {}
        grid = _int_list(block, "neuron_grid", where, errs, lo=4)
        if grid is not None:
            out["neuron_grid"] = grid
        return out

    return _build(cls, block, where, errors,
                  int_fields={"d": (2, None), "trials": (1, None),
                              "atoms": (1, None), "probe_points": (100, None)},
                  float_fields={"total_variation": {"lo_strict": 0.0}},
                  extra=extra)


_TOP_KEYS = ("dims", "norms", "sample_sizes", "trials", "tau", "master_seed",
             "training", "norm_estimation", "approx_rate", "horizon_approx")


def validate_config(source) -> ExperimentConfig:
    """Parse and validate a config from a dict or a JSON file path.

    Raises ConfigError carrying every problem found, not just the first.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a JSON object"])

    errors: list = []
    _check_keys(raw, _TOP_KEYS, "config", errors)
    kwargs = {}

    dims = _int_list(raw, "dims", "config", errors, lo=2, allowed={2, 3, 4})
    if dims is not None:
        kwargs["dims"] = dims
    sizes = _int_list(raw, "sample_sizes", "config", errors, lo=10)
    if sizes is not None:
        kwargs["sample_sizes"] = sizes
    if "norms" in raw:
        norms = raw["norms"]
        if not isinstance(norms, (list, tuple)) or not norms:
            errors.append("config.norms: expected a nonempty list")
        else:
            seen = []
            for v in norms:
                if not isinstance(v, str) or v.lower() not in NORM_KINDS:
                    errors.append(f"config.norms: {v!r} not one of {list(NORM_KINDS)}")
                elif v.lower() not in seen:
                    seen.append(v.lower())
            if seen:
                kwargs["norms"] = tuple(n for n in NORM_KINDS if n in seen)
    trials = _get_int(raw, "trials", "config", errors, lo=1)
    if trials is not None:
        kwargs["trials"] = trials
    tau = _get_float(raw, "tau", "config", errors, lo=1.0)
    if tau is not None:
        kwargs["tau"] = tau
    seed = _get_int(raw, "master_seed", "config", errors, lo=0)
    if seed is not None:
        kwargs["master_seed"] = seed

    kwargs["training"] = _training_from(_sub_block(raw, "training", errors), errors)
    kwargs["norm_estimation"] = _norm_est_from(_sub_block(raw, "norm_estimation", errors), errors)
    kwargs["approx_rate"] = _approx_from(ApproxRateSettings,
                                         _sub_block(raw, "approx_rate", errors),
                                         "approx_rate", errors)
    kwargs["horizon_approx"] = _approx_from(HorizonApproxSettings,
                                            _sub_block(raw, "horizon_approx", errors),
                                            "horizon_approx", errors)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(**kwargs)


def as_dict(cfg: ExperimentConfig) -> dict:
    """Resolved config (defaults filled in) as plain JSON-ready data."""
    def convert(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: convert(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, tuple):
            return [convert(v) for v in obj]
        return obj

    return convert(cfg)


def write_resolved_config(cfg: ExperimentConfig, output_dir) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "resolved_config.json"
    path.write_text(json.dumps(as_dict(cfg), indent=2, sort_keys=True) + "\n")
    return path
