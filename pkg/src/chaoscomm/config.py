"""Line-oriented experiment configuration.

Files are ``key = value`` pairs with ``#`` comments.  Every experiment has a
key schema; unknown keys are rejected and numeric values are validated
against the owning type's invariants.  Parsing collects all errors before
failing so a bad file reports everything at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import ChuaParams

_POSITIVE = ("must be > 0", lambda v: v > 0)
_NONNEG = ("must be >= 0", lambda v: v >= 0)
_FRACTION = ("must be in (0, 1)", lambda v: 0 < v < 1)


def _chua_key(name, default):
    rule = {
        "sigma": ("must be > 0 (ChuaParams invariant)", lambda v: v > 0),
        "beta": ("must be > 0 (ChuaParams invariant)", lambda v: v > 0),
        "b": ("must be > 0 (ChuaParams invariant)", lambda v: v > 0),
    }.get(name)
    return (float, default, rule)


_CHUA_KEYS = {
    "sigma": _chua_key("sigma", 15.6),
    "beta": _chua_key("beta", 28.0),
    "m0": (float, -1.143, None),
    "m1": (float, -0.714, None),
    "b": _chua_key("b", 1.0),
    "dt": (float, 1.0e-3, _POSITIVE),
}

_ENGINE_KEYS = {
    "engine": (str, "two_region", ("must be one of two_region/even_odd/eight_section",
                                   lambda v: v in ("two_region", "even_odd", "eight_section"))),
    "v1": (float, 1.0, None),
    "v2": (float, 0.0, None),
    "v3": (float, 0.0, None),
    "engine_h": (float, 0.5, _POSITIVE),
    "engine_theta": (float, 0.19, _POSITIVE),
    "engine_x3_threshold": (float, 1.77, None),
}

_TS_KEYS = {
    "lambda0": (float, 1.0, ("must be in (0, inf) (TimeScaling invariant)", lambda v: v > 0)),
    "lambda1": (float, 1.3, ("must be in (0, inf) (TimeScaling invariant)", lambda v: v > 0)),
    "n_bits": (int, 64, ("must be >= 3", lambda v: v >= 3)),
    "bit_duration": (float, 40.0, _POSITIVE),
}

_PULSE_KEYS = {
    "horizon": (float, 150.0, _POSITIVE),
    "pulse_on": (float, 25.0, _NONNEG),
    "pulse_duration": (float, 5.0, _POSITIVE),
    "pulse_rise": (float, 2.0, _NONNEG),
    "amplitude_fraction": (float, 0.01, _NONNEG),
    "transient": (float, 25.0, _NONNEG),
}

SCHEMAS = {
    "simulate": {
        **_CHUA_KEYS,
        "horizon": (float, 200.0, _POSITIVE),
        "transient": (float, 50.0, _NONNEG),
        "x0": (float, 0.1, None),
        "y0": (float, 0.0, None),
        "z0": (float, 0.0, None),
    },
    "mask": {**_CHUA_KEYS, **_PULSE_KEYS},
    "tscsk": {**_CHUA_KEYS, **_TS_KEYS, **_ENGINE_KEYS},
    "attack-rm": {
        **_CHUA_KEYS, **_TS_KEYS, **_ENGINE_KEYS,
        "target": (str, "both", ("must be one of csk/tscsk/both",
                                 lambda v: v in ("csk", "tscsk", "both"))),
        "hysteresis": (float, 0.1, _POSITIVE),
        "csk_sigma_scale": (float, 1.10, _POSITIVE),
    },
    "attack-power": {**_CHUA_KEYS, **_PULSE_KEYS},
    "attack-kpa": {
        **_CHUA_KEYS,
        "pipeline": (str, "mask", ("must be one of mask/tscsk", lambda v: v in ("mask", "tscsk"))),
        "n_trials": (int, 4, ("must be >= 2", lambda v: v >= 2)),
        "delta": (float, 1.0e-6, _NONNEG),
        "horizon": (float, 100.0, _POSITIVE),
        "n_bits": (int, 16, ("must be >= 3", lambda v: v >= 3)),
        "bit_duration": (float, 40.0, _POSITIVE),
    },
    "retune": {
        **_CHUA_KEYS,
        "scale": (float, 4.0, _POSITIVE),
        "jam_lo": (float, 0.07, _POSITIVE),
        "jam_hi": (float, 0.25, _POSITIVE),
        "jam_power_fraction": (float, 0.01, _NONNEG),
        "horizon": (float, 200.0, _POSITIVE),
        "pulse_on": (float, 80.0, _NONNEG),
        "pulse_duration": (float, 40.0, _POSITIVE),
        "pulse_rise": (float, 12.0, _NONNEG),
        "amplitude_fraction": (float, 0.05, _NONNEG),
        "transient": (float, 30.0, _NONNEG),
    },
    "lock": {
        **_CHUA_KEYS,
        "key_file": (str, "", None),
        "errors": (str, "-0.2,-0.1,-0.05,-0.02,0",
                   ("must be a comma list of floats in (-1, 1)", None)),
        "tolerance": (float, 0.05, _FRACTION),
        "horizon": (float, 60.0, _POSITIVE),
    },
    "stability": {
        **_CHUA_KEYS,
        "grid_extent": (float, 0.05, _FRACTION),
        "grid_points": (int, 3, ("must be >= 2 and odd", lambda v: v >= 2)),
        "lyap_horizon": (float, 400.0, _POSITIVE),
    },
}

EXPERIMENTS = tuple(sorted(SCHEMAS))


class ConfigError(ValueError):
    """Carries every validation problem found in a config source."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    def chua_params(self) -> ChuaParams:
        return ChuaParams(sigma=self.params["sigma"], beta=self.params["beta"],
                          m0=self.params["m0"], m1=self.params["m1"], b=self.params["b"])


def _parse_value(raw: str, typ):
    if typ is int:
        v = int(raw)
    elif typ is float:
        v = float(raw)
    else:
        v = raw
    return v


def parse_errors_list(raw: str):
    vals = [float(tok) for tok in raw.split(",") if tok.strip()]
    if not vals or any(not (-1.0 < v < 1.0) for v in vals):
        raise ValueError("errors must be a comma list of floats in (-1, 1)")
    return vals


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse config text into a typed ExperimentConfig.

    Raises ConfigError listing every problem (unknown key, bad type, range
    violation) with its line number; overrides are applied after the file and
    validated the same way.
    """
    errors: list[str] = []
    raw: dict[str, tuple[str, str]] = {}

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in raw:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        raw[key] = (value, f"line {lineno}")

    for key, value in (overrides or {}).items():
        raw[key] = (str(value), "override")

    exp_entry = raw.pop("experiment", None)
    if exp_entry is None:
        raise ConfigError(errors + ["experiment key required"])
    experiment = exp_entry[0]
    if experiment not in SCHEMAS:
        raise ConfigError(errors + [
            f"{exp_entry[1]}: unknown experiment '{experiment}' (choose from {', '.join(EXPERIMENTS)})"
        ])
    schema = SCHEMAS[experiment]

    seed = 0
    if "seed" in raw:
        value, where = raw.pop("seed")
        try:
            seed = int(value)
        except ValueError:
            errors.append(f"{where}: seed must be an integer, got '{value}'")
    output_dir = "out"
    if "output_dir" in raw:
        output_dir = raw.pop("output_dir")[0]

    params = {}
    for key, (value, where) in raw.items():
        if key not in schema:
            errors.append(f"{where}: unknown key '{key}' for experiment '{experiment}'")
            continue
        typ, _default, rule = schema[key]
        try:
            parsed = _parse_value(value, typ)
        except ValueError:
            errors.append(f"{where}: key '{key}' must be {typ.__name__}, got '{value}'")
            continue
        if rule is not None:
            message, check = rule
            ok = True
            if check is not None:
                ok = check(parsed)
            elif key == "errors":
                try:
                    parse_errors_list(parsed)
                except ValueError:
                    ok = False
            if not ok:
                errors.append(f"{where}: key '{key}' {message}, got '{value}'")
                continue
        params[key] = parsed

    if errors:
        raise ConfigError(errors)

    for key, (typ, default, _rule) in schema.items():
        params.setdefault(key, default)
    return ExperimentConfig(experiment=experiment, params=params, seed=seed, output_dir=output_dir)


def format_config(cfg: ExperimentConfig) -> str:
    """Echo a config as re-parseable text (round-trips through parse_config)."""
    lines = [f"experiment = {cfg.experiment}", f"seed = {cfg.seed}", f"output_dir = {cfg.output_dir}"]
    for key in sorted(cfg.params):
        v = cfg.params[key]
        lines.append(f"{key} = {v}" if isinstance(v, str) else f"{key} = {v!r}")
    return "\n".join(lines) + "\n"
