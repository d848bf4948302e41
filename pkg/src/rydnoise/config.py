"""Scenario configuration: strict key/value file with explicit unit suffixes.

Format: ``[section]`` headers and ``key = value`` lines, ``#`` comments.
Unknown keys, missing unit suffixes, bad units, and out-of-range values are
collected as diagnostics carrying file and line. Defaults are applied where
documented; provenance (user vs default) is recorded per key.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .exceptions import ConfigurationError
from .structure import QuantumDefectTable, RydbergState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int
    message: str

    def __str__(self):
        return f"{self.path}:{self.line}: {self.message}"


def _parse_state(text: str) -> RydbergState:
    parts = text.split()
    if len(parts) != 3:
        raise ValueError("state must be 'n L j' like '57 S 1/2'")
    n = int(parts[0])
    letters = "SPDFGHIKLMN"
    if parts[1].upper() not in letters:
        raise ValueError(f"unknown orbital letter {parts[1]!r}")
    l = letters.index(parts[1].upper())
    num, _, den = parts[2].partition("/")
    j = float(num) / float(den or "1")
    return RydbergState(n, l, j)


# key -> (type, required, default, validator); types: float, int, str, state,
# float_list. Dimensionless keys carry no unit suffix by design.
_SCHEMA: dict[str, dict] = {
    "atom": {
        "defect_table": ("str", False, "builtin:rb85", None),
        "state_3": ("state", False, "57 S 1/2", None),
        "state_4": ("state", False, "57 P 1/2", None),
        "rf_dipole_ea0": ("float", False, None, ("positive_or_none",)),
        "probe_dipole_ea0": ("float", False, 2.99, ("positive",)),
        "coupling_dipole_ea0": ("float", False, 0.012, ("positive",)),
        "n_window": ("int", False, 10, ("positive",)),
        "gamma_2_per_s": ("float", False, TWO_PI * 6.0666e6, ("positive",)),
        "gamma_3_per_s": ("float", False, TWO_PI * 1.0e4, ("nonnegative",)),
        "gamma_4_per_s": ("float", False, TWO_PI * 1.0e4, ("nonnegative",)),
        "gamma_extra_per_s": ("float", False, 0.0, ("nonnegative",)),
    },
    "drives": {
        "rf_frequency_Hz": ("float", True, None, ("positive",)),
        "rf_detuning_Hz": ("float", False, 0.0, None),
        "cw_powers_W": ("float_list", True, None, ("nonnegative_list",)),
        "scan_laser": ("str", False, "coupling", ("choice", ("coupling", "probe"))),
        "scan_min_Hz": ("float", True, None, None),
        "scan_max_Hz": ("float", True, None, None),
        "scan_points": ("int", False, 301, ("at_least", 5)),
    },
    "noise": {
        "psd_file": ("str", False, None, None),
        "psd_total_power_W": ("float", False, None, ("positive_or_none",)),
        "rect_centers_Hz": ("float_list", False, None, ("positive_list",)),
        "rect_widths_Hz": ("float_list", False, None, ("positive_list",)),
        "rect_powers_W": ("float_list", False, None, ("nonnegative_list",)),
        "attenuations_dB": ("float_list", False, [0.0], None),
        "exclusion_halfwidth_Hz": ("float", False, 1.0e6, ("positive",)),
    },
    "geometry": {
        "distance_m": ("float", True, None, ("positive",)),
        "enhancement_factor": ("float", False, 1.0, ("positive",)),
        "gain_reference_dB": ("float", False, 15.0, None),
        "gain_slope_dB_per_GHz": ("float", False, 3.0 / 8.5, None),
        "gain_reference_frequency_GHz": ("float", False, 18.0, ("positive",)),
    },
    "cell": {
        "length_m": ("float", False, 0.075, ("positive",)),
        "temperature_K": ("float", False, 294.0, ("range", 250.0, 450.0)),
        "isotope_fraction": ("float", False, 0.7217, ("fraction",)),
        "probe_wavelength_m": ("float", False, 780.241e-9, ("positive",)),
        "coupling_wavelength_m": ("float", False, 479.9285e-9, ("positive",)),
        "probe_power_W": ("float", False, 4.1e-6, ("positive",)),
        "probe_fwhm_m": ("float", False, 270e-6, ("positive",)),
        "coupling_power_W": ("float", False, 43.3e-3, ("positive",)),
        "coupling_fwhm_m": ("float", False, 353e-6, ("positive",)),
    },
    "run": {
        "velocity_classes": ("int", False, 3201, ("at_least", 1)),
        "velocity_span": ("float", False, 4.0, ("positive",)),
        "fine_window_m_per_s": ("float", False, 100.0, ("positive",)),
        "peak_prominence_fraction": ("float", False, 0.05, ("fraction",)),
        "table_prominence_fraction": ("float", False, 0.002, ("fraction",)),
        "output_dir": ("str", False, "out", None),
        "matrix_element_cache": ("int", False, 1, ("choice", (0, 1))),
    },
}


@dataclass
class ScenarioConfig:
    """Fully-resolved scenario; ``provenance[section.key]`` is 'user' or 'default'."""

    values: dict[str, dict[str, object]]
    provenance: dict[str, str]
    base_dir: Path
    source_text: str

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    def state(self, which: str) -> RydbergState:
        return _parse_state(str(self.values["atom"][which]))

    def defect_table(self) -> QuantumDefectTable:
        name = str(self.values["atom"]["defect_table"])
        if name == "builtin:rb85":
            ref = resources.files("rydnoise").joinpath("data/rb85_quantum_defects.cfg")
            with resources.as_file(ref) as path:
                return QuantumDefectTable.load(path)
        return QuantumDefectTable.load(self.base_dir / name)

    def config_hash(self) -> str:
        lines = []
        for section in sorted(self.values):
            for key in sorted(self.values[section]):
                lines.append(f"{section}.{key}={self.values[section][key]!r}")
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _convert(kind: str, raw: str):
    if kind == "float":
        return float(raw)
    if kind == "int":
        out = int(raw)
        return out
    if kind == "float_list":
        return [float(p) for p in raw.split(",") if p.strip() != ""]
    if kind == "state":
        _parse_state(raw)
        return raw
    return raw


def _validate(rule, value):
    if rule is None or value is None:
        return None
    tag = rule[0]
    if tag == "positive" and not value > 0:
        return "must be > 0"
    if tag == "positive_or_none" and value is not None and not value > 0:
        return "must be > 0"
    if tag == "nonnegative" and value < 0:
        return "must be >= 0"
    if tag == "fraction" and not 0 < value <= 1:
        return "must be in (0, 1]"
    if tag == "range" and not rule[1] < value < rule[2]:
        return f"must be in ({rule[1]}, {rule[2]})"
    if tag == "at_least" and value < rule[1]:
        return f"must be >= {rule[1]}"
    if tag == "choice" and value not in rule[1]:
        return f"must be one of {rule[1]}"
    if tag == "positive_list" and any(x <= 0 for x in value):
        return "entries must be > 0"
    if tag == "nonnegative_list" and any(x < 0 for x in value):
        return "entries must be >= 0"
    return None


def validate_config(path) -> ScenarioConfig:
    """Parse and fully resolve a scenario file; raises ConfigurationError with
    one diagnostic per problem."""
    path = Path(path)
    text = path.read_text()
    diags: list[Diagnostic] = []
    values: dict[str, dict[str, object]] = {s: {} for s in _SCHEMA}
    provenance: dict[str, str] = {}
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                diags.append(Diagnostic(str(path), lineno, f"unknown section [{section}]"))
                section = None
            continue
        if "=" not in line:
            diags.append(Diagnostic(str(path), lineno, "expected 'key = value'"))
            continue
        if section is None:
            diags.append(Diagnostic(str(path), lineno, "key outside any [section]"))
            continue
        key, _, rawval = line.partition("=")
        key = key.strip()
        rawval = rawval.strip()
        schema = _SCHEMA[section]
        if key not in schema:
            hint = ""
            for known in schema:
                base = known.rsplit("_", 1)[0]
                if key == base or known.startswith(key + "_"):
                    hint = f" (unit mismatch: did you mean {known!r}?)"
                    break
            diags.append(Diagnostic(str(path), lineno, f"unknown key {key!r} in [{section}]{hint}"))
            continue
        kind, _req, _default, rule = schema[key]
        try:
            value = _convert(kind, rawval)
        except ValueError as exc:
            diags.append(Diagnostic(str(path), lineno, f"{key}: {exc}"))
            continue
        problem = _validate(rule, value)
        if problem:
            diags.append(Diagnostic(str(path), lineno, f"{key}: {problem}"))
            continue
        if key in values[section]:
            diags.append(Diagnostic(str(path), lineno, f"duplicate key {key!r}"))
            continue
        values[section][key] = value
        provenance[f"{section}.{key}"] = "user"

    for section, schema in _SCHEMA.items():
        for key, (kind, required, default, _rule) in schema.items():
            if key in values[section]:
                continue
            if required:
                diags.append(Diagnostic(str(path), 0, f"missing required key [{section}] {key}"))
            else:
                values[section][key] = default
                provenance[f"{section}.{key}"] = "default"

    # cross-field checks
    noise = values["noise"]
    rect_keys = ("rect_centers_Hz", "rect_widths_Hz", "rect_powers_W")
    have_rects = any(noise.get(k) is not None for k in rect_keys)
    if noise.get("psd_file") is None and not have_rects:
        diags.append(Diagnostic(str(path), 0, "[noise] needs psd_file or rect_* keys"))
    if have_rects:
        lengths = {k: len(noise[k]) for k in rect_keys if noise.get(k) is not None}
        if len(lengths) != 3 or len(set(lengths.values())) != 1:
            diags.append(Diagnostic(str(path), 0, "[noise] rect_* lists must all be present with equal length"))
    drv = values["drives"]
    if (
        "scan_min_Hz" in drv
        and "scan_max_Hz" in drv
        and drv.get("scan_min_Hz") is not None
        and drv.get("scan_max_Hz") is not None
        and not drv["scan_min_Hz"] < drv["scan_max_Hz"]
    ):
        diags.append(Diagnostic(str(path), 0, "[drives] scan_min_Hz must be < scan_max_Hz"))

    if diags:
        summary = "; ".join(str(d) for d in diags[:8])
        raise ConfigurationError(f"invalid config {path}: {summary}", diags)
    return ScenarioConfig(values, provenance, path.parent, text)


def builtin_config_path(name: str) -> Path:
    """Path of a shipped scenario config, e.g. 'paper-filter2'."""
    ref = resources.files("rydnoise").joinpath(f"data/configs/{name}.cfg")
    with resources.as_file(ref) as p:
        return Path(p)


__all__ = ["Diagnostic", "ScenarioConfig", "builtin_config_path", "validate_config"]
