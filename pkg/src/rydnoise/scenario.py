"""Scenario orchestration: build the forward model from a config, sweep the
(attenuation, CW power) grid, and export spectra/analysis artifacts."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    at_splitting,
    csnr_analysis,
    farfield_efield,
    find_peaks,
    infer_efield,
    peak_height_scale,
    zero_rf_offset,
)
from .config import ScenarioConfig
from .constants import E_A0, HBAR
from .lindblad import DecayParameters, DriveParameters
from .noise import (
    FieldGeometry,
    NoiseSpectrum,
    combine_spectra,
    load_noise_psd,
    make_rect_spectrum,
    noise_couplings,
)
from .spectroscopy import CellParameters, ForwardModel, rabi_from_beam
from .structure import dipole_moment, set_matrix_element_cache, transition_frequency

TWO_PI = 2.0 * math.pi


@dataclass
class ScenarioModel:
    """Resolved physics objects shared by all scenario verbs."""

    config: ScenarioConfig
    model: ForwardModel
    geometry: FieldGeometry
    spectrum: NoiseSpectrum
    rf_dipole_ea0: float
    rf_frequency_hz: float
    scan_grid: np.ndarray
    scan_laser: str
    attenuations_db: list[float]
    cw_powers_w: list[float]
    couplings_cache: dict


def build_scenario(cfg: ScenarioConfig) -> ScenarioModel:
    atom = cfg["atom"]
    drv = cfg["drives"]
    noi = cfg["noise"]
    geo = cfg["geometry"]
    cel = cfg["cell"]
    run = cfg["run"]

    set_matrix_element_cache(bool(run["matrix_element_cache"]))
    defects = cfg.defect_table()
    s3 = cfg.state("state_3")
    s4 = cfg.state("state_4")

    rf_dipole = atom["rf_dipole_ea0"]
    if rf_dipole is None:
        rf_dipole = dipole_moment(s3, s4, defects).total_ea0
    nu_34 = transition_frequency(s3, s4, defects)

    geometry = FieldGeometry(
        distance_m=geo["distance_m"],
        enhancement=geo["enhancement_factor"],
        gain_reference_db=geo["gain_reference_dB"],
        gain_slope_db_per_ghz=geo["gain_slope_dB_per_GHz"],
        gain_reference_ghz=geo["gain_reference_frequency_GHz"],
    )
    if noi["psd_file"] is not None:
        spectrum = load_noise_psd(cfg.base_dir / str(noi["psd_file"]), noi["psd_total_power_W"])
    else:
        rects = [
            make_rect_spectrum(c, w, p)
            for c, w, p in zip(noi["rect_centers_Hz"], noi["rect_widths_Hz"], noi["rect_powers_W"])
        ]
        spectrum = rects[0] if len(rects) == 1 else combine_spectra(rects)

    cell = CellParameters(
        length_m=cel["length_m"],
        temperature_k=cel["temperature_K"],
        isotope_fraction=cel["isotope_fraction"],
        lambda_probe_m=cel["probe_wavelength_m"],
        lambda_coupling_m=cel["coupling_wavelength_m"],
        probe_power_w=cel["probe_power_W"],
        probe_fwhm_m=cel["probe_fwhm_m"],
        coupling_power_w=cel["coupling_power_W"],
        coupling_fwhm_m=cel["coupling_fwhm_m"],
    )
    drives = DriveParameters(
        omega_p=rabi_from_beam(cell.probe_power_w, cell.probe_fwhm_m, atom["probe_dipole_ea0"]),
        omega_c=rabi_from_beam(
            cell.coupling_power_w, cell.coupling_fwhm_m, atom["coupling_dipole_ea0"]
        ),
        omega_rf=0.0,
        delta_rf=TWO_PI * (drv["rf_frequency_Hz"] + drv["rf_detuning_Hz"] - nu_34),
    )
    decays = DecayParameters(
        gamma_2=atom["gamma_2_per_s"],
        gamma_3=atom["gamma_3_per_s"],
        gamma_4=atom["gamma_4_per_s"],
        gamma_extra=atom["gamma_extra_per_s"],
    )
    model = ForwardModel(
        drives=drives,
        decays=decays,
        cell=cell,
        probe_dipole_ea0=atom["probe_dipole_ea0"],
        n_velocity=run["velocity_classes"],
        velocity_span=run["velocity_span"],
        fine_window_m_s=run["fine_window_m_per_s"],
    )
    scan_grid = TWO_PI * np.linspace(drv["scan_min_Hz"], drv["scan_max_Hz"], drv["scan_points"])

    sm = ScenarioModel(
        config=cfg,
        model=model,
        geometry=geometry,
        spectrum=spectrum,
        rf_dipole_ea0=float(rf_dipole),
        rf_frequency_hz=float(drv["rf_frequency_Hz"]),
        scan_grid=scan_grid,
        scan_laser=str(drv["scan_laser"]),
        attenuations_db=[float(a) for a in noi["attenuations_dB"]],
        cw_powers_w=[float(p) for p in drv["cw_powers_W"]],
        couplings_cache={},
    )
    sm.couplings_cache["_inputs"] = (s3, s4, defects, atom["n_window"], noi["exclusion_halfwidth_Hz"])
    return sm


def couplings_for(sm: ScenarioModel, attenuation_db: float):
    """Noise couplings for one attenuation (cached; shapes scale linearly)."""
    if attenuation_db not in sm.couplings_cache:
        s3, s4, defects, n_window, halfwidth = sm.couplings_cache["_inputs"]
        sm.couplings_cache[attenuation_db] = noise_couplings(
            sm.spectrum.attenuated(attenuation_db),
            sm.geometry,
            s3,
            s4,
            defects,
            n_window=n_window,
            exclusion_halfwidth=halfwidth,
        )
    return sm.couplings_cache[attenuation_db]


def omega_rf_for_power(sm: ScenarioModel, cw_power_w: float) -> float:
    e_field = farfield_efield(cw_power_w, sm.rf_frequency_hz, sm.geometry)
    return sm.rf_dipole_ea0 * E_A0 * e_field / HBAR


def _write_csv(path: Path, header: dict, columns: dict) -> None:
    lines = [f"# {k}={v}" for k, v in sorted(header.items())]
    names = list(columns)
    lines.append(",".join(names))
    for row in zip(*columns.values()):
        lines.append(
            ",".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in row)
        )
    path.write_text("\n".join(lines) + "\n")


@dataclass
class ScenarioBundle:
    out_dir: Path
    spectra_files: list[Path]
    analysis_files: list[Path]
    manifest_file: Path


def run_scenario(cfg: ScenarioConfig, out_dir=None, progress=None) -> ScenarioBundle:
    """One spectrum per (attenuation, CW power) plus a no-noise reference set,
    offset/field-estimate tables, and a manifest with config and output hashes."""
    t_start = time.time()
    sm = build_scenario(cfg)
    out = Path(out_dir) if out_dir is not None else Path(str(cfg["run"]["output_dir"]))
    out.mkdir(parents=True, exist_ok=True)
    spectra_files: list[Path] = []
    analysis_files: list[Path] = []

    def note(msg):
        if progress:
            progress(msg)

    cases = [(None, None)] + [(a, couplings_for(sm, a)) for a in sm.attenuations_db]
    ref_peak_scale = None
    rows = []
    for atten, coup in cases:
        for p_cw in sm.cw_powers_w:
            omega_rf = omega_rf_for_power(sm, p_cw)
            label = "ref" if atten is None else f"att{atten:+g}dB"
            note(f"spectrum {label} P={p_cw*1e3:.3g} mW")
            spec = sm.model.spectrum(
                sm.scan_grid,
                scan=sm.scan_laser,
                couplings=coup,
                omega_rf=omega_rf,
                metadata={
                    "attenuation_dB": "none" if atten is None else atten,
                    "cw_power_W": p_cw,
                    "noise_power_W": 0.0
                    if atten is None
                    else sm.spectrum.attenuated(atten).integrated_power_w,
                    "config_hash": cfg.config_hash(),
                    "enhancement_factor": sm.geometry.enhancement,
                    "distance_m": sm.geometry.distance_m,
                },
            )
            fname = out / f"spectrum_{label}_p{p_cw*1e3:08.4f}mW.csv"
            spec.write_csv(fname)
            spectra_files.append(fname)
            if ref_peak_scale is None:
                ref_peak_scale = peak_height_scale(spec)
            prom = float(cfg["run"]["table_prominence_fraction"]) * ref_peak_scale
            peaks = find_peaks(spec, prominence=prom)
            split = at_splitting(peaks)
            e_inferred = (
                None if split is None else infer_efield(split, sm.rf_dipole_ea0, _d_factor(sm))
            )
            rows.append(
                (
                    "none" if atten is None else atten,
                    p_cw,
                    omega_rf,
                    farfield_efield(p_cw, sm.rf_frequency_hz, sm.geometry),
                    split if split is not None else float("nan"),
                    e_inferred if e_inferred is not None else float("nan"),
                )
            )

    fields_file = out / "field_estimates.csv"
    _write_csv(
        fields_file,
        {"config_hash": cfg.config_hash(), "d_factor": _d_factor(sm)},
        {
            "attenuation_dB": [r[0] for r in rows],
            "cw_power_W": [r[1] for r in rows],
            "omega_rf_rad_s": [r[2] for r in rows],
            "e_farfield_V_m": [r[3] for r in rows],
            "splitting_Hz": [r[4] for r in rows],
            "e_inferred_V_m": [r[5] for r in rows],
        },
    )
    analysis_files.append(fields_file)

    offsets_file = out / "zero_rf_offsets.csv"
    offs = table1_offsets(sm, note=note)
    _write_csv(
        offsets_file,
        {"config_hash": cfg.config_hash()},
        {
            "attenuation_dB": [o[0] for o in offs],
            "offset_Hz": [o[1] if o[1] is not None else float("nan") for o in offs],
            "suppressed": [int(o[2]) for o in offs],
        },
    )
    analysis_files.append(offsets_file)

    manifest = {
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "wall_time_s": time.time() - t_start,
        "outputs": {
            f.name: hashlib.sha256(f.read_bytes()).hexdigest()
            for f in sorted(spectra_files + analysis_files)
        },
    }
    manifest["output_hash"] = hashlib.sha256(
        json.dumps(manifest["outputs"], sort_keys=True).encode()
    ).hexdigest()
    manifest_file = out / "manifest.json"
    manifest_file.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    bundle = ScenarioBundle(out, spectra_files, analysis_files, manifest_file)
    export_plotdata(bundle)
    return bundle


def _d_factor(sm: ScenarioModel) -> float:
    if sm.scan_laser == "coupling":
        return 1.0
    return sm.model.cell.lambda_probe_m / sm.model.cell.lambda_coupling_m


def table1_offsets(sm: ScenarioModel, scan_halfwidth_hz: float = 150e6, note=None):
    """Zero-RF EIT offsets per attenuation: list of (attenuation, offset_hz, suppressed)."""
    grid = TWO_PI * np.linspace(-scan_halfwidth_hz, scan_halfwidth_hz, 301)
    reference = sm.model.spectrum(grid, scan=sm.scan_laser, omega_rf=0.0)
    out = []
    for atten in sm.attenuations_db:
        if note:
            note(f"offset at {atten:+g} dB")
        res = zero_rf_offset(
            sm.model,
            grid,
            couplings_for(sm, atten),
            relative_prominence=float(sm.config["run"]["table_prominence_fraction"]),
            reference=reference,
        )
        out.append((atten, res.offset_hz, res.suppressed))
    return out


def csnr_table(sm: ScenarioModel, note=None):
    """Fig.-11-style sweep over (attenuation x CW power), skipping zero power."""
    cases = []
    for atten in sm.attenuations_db:
        power = sm.spectrum.attenuated(atten).integrated_power_w
        cases.append((power, couplings_for(sm, atten)))
    powers = [p for p in sm.cw_powers_w if p > 0]
    return csnr_analysis(
        sm.model,
        sm.geometry,
        sm.rf_frequency_hz,
        sm.rf_dipole_ea0,
        powers,
        cases,
        relative_prominence=float(sm.config["run"]["table_prominence_fraction"]),
        d_factor=_d_factor(sm),
    )


def export_plotdata(bundle: ScenarioBundle, offset_step: float = 0.05) -> list[Path]:
    """Waterfall files: one column per CW power, traces vertically offset."""
    groups: dict[str, list[Path]] = {}
    for f in bundle.spectra_files:
        label = f.name.split("_")[1]
        groups.setdefault(label, []).append(f)
    written = []
    if not groups:
        path = bundle.out_dir / "waterfall_empty.csv"
        _write_csv(path, {"offset_step": offset_step, "n_traces": 0}, {"detuning_Hz": []})
        return [path]
    for label, files in sorted(groups.items()):
        columns: dict[str, list] = {}
        header = {"offset_step": offset_step, "n_traces": len(files)}
        for k, f in enumerate(sorted(files)):
            det, trans = [], []
            for line in f.read_text().splitlines():
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    if key in ("cw_power_W", "attenuation_dB", "enhancement_factor", "distance_m"):
                        header[f"trace{k:02d}_{key}"] = value
                    continue
                if line.startswith("detuning_Hz"):
                    continue
                a, b = line.split(",")
                det.append(float(a))
                trans.append(float(b))
            columns.setdefault("detuning_Hz", det)
            columns[f"trace_{k:03d}"] = [t + k * offset_step for t in trans]
        path = bundle.out_dir / f"waterfall_{label}.csv"
        _write_csv(path, header, columns)
        written.append(path)
    return written


__all__ = [
    "ScenarioBundle",
    "ScenarioModel",
    "build_scenario",
    "couplings_for",
    "csnr_table",
    "export_plotdata",
    "omega_rf_for_power",
    "run_scenario",
    "table1_offsets",
]
