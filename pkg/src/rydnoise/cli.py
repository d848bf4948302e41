"""Command-line interface.

Verbs: validate, run, spectrum, table1, csnr. Exit codes: 0 success,
1 config error, 2 numerical failure, 3 suppressed-EIT partial results.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import validate_config
from .exceptions import ConfigurationError, RydnoiseError
from .kernels import set_num_threads
from .scenario import (
    build_scenario,
    couplings_for,
    csnr_table,
    omega_rf_for_power,
    run_scenario,
    table1_offsets,
)

TWO_PI = 2.0 * math.pi


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rydnoise", description=__doc__)
    p.add_argument("--threads", type=int, default=1, help="worker threads for the solver grid")
    sub = p.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("validate", help="parse a config and report diagnostics")
    sp.add_argument("config")

    sp = sub.add_parser("run", help="full (attenuation x CW power) sweep with exports")
    sp.add_argument("config")
    sp.add_argument("--out", default=None, help="output directory (default from config)")
    sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("spectrum", help="one spectrum at a given power and attenuation")
    sp.add_argument("config")
    sp.add_argument("--power", type=float, required=True, help="CW power at the horn, W")
    sp.add_argument("--atten", type=float, default=None, help="noise attenuation in dB; omit for no noise")
    sp.add_argument("--out", default="spectrum.csv")

    sp = sub.add_parser("table1", help="zero-RF EIT offsets per attenuation")
    sp.add_argument("config")

    sp = sub.add_parser("csnr", help="percent difference of inferred field vs CSNR")
    sp.add_argument("config")
    sp.add_argument("--out", default=None, help="optional CSV output path")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    set_num_threads(args.threads)
    try:
        cfg = validate_config(args.config)
    except ConfigurationError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        if not exc.diagnostics:
            print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 1

    try:
        if args.verb == "validate":
            print(f"OK {args.config} (hash {cfg.config_hash()[:12]})")
            for key, src in sorted(cfg.provenance.items()):
                print(f"  {key}: {src}")
            return 0

        if args.verb == "run":
            progress = None if args.quiet else lambda m: print(f"  {m}", file=sys.stderr)
            bundle = run_scenario(cfg, out_dir=args.out, progress=progress)
            print(f"wrote {len(bundle.spectra_files)} spectra to {bundle.out_dir}")
            offsets = (bundle.out_dir / "zero_rf_offsets.csv").read_text()
            suppressed = any(line.endswith(",1") for line in offsets.splitlines()[2:])
            return 3 if suppressed else 0

        sm = build_scenario(cfg)
        if args.verb == "spectrum":
            coup = None if args.atten is None else couplings_for(sm, args.atten)
            spec = sm.model.spectrum(
                sm.scan_grid,
                scan=sm.scan_laser,
                couplings=coup,
                omega_rf=omega_rf_for_power(sm, args.power),
                metadata={"cw_power_W": args.power, "attenuation_dB": args.atten},
            )
            spec.write_csv(args.out)
            print(f"wrote {args.out}")
            return 0

        if args.verb == "table1":
            rows = table1_offsets(sm)
            print("attenuation_dB,offset_MHz,suppressed")
            suppressed = False
            for atten, offset, sup in rows:
                suppressed |= sup
                text = "nan" if offset is None else f"{offset/1e6:+.2f}"
                print(f"{atten:+g},{text},{int(sup)}")
            return 3 if suppressed else 0

        if args.verb == "csnr":
            points = csnr_table(sm)
            lines = [
                f"# config_hash={cfg.config_hash()}",
                f"# rf_frequency_Hz={sm.rf_frequency_hz}",
                f"# rf_dipole_ea0={sm.rf_dipole_ea0}",
                "cw_power_W,noise_power_W,csnr,e_ref_V_m,e_noisy_V_m,percent_difference",
            ]
            suppressed = False
            for pt in points:
                suppressed |= pt.percent_difference is None
                lines.append(
                    ",".join(
                        "nan" if x is None else repr(float(x))
                        for x in (pt.cw_power_w, pt.noise_power_w, pt.csnr,
                                  pt.e_reference_v_m, pt.e_noisy_v_m, pt.percent_difference)
                    )
                )
            text = "\n".join(lines)
            if args.out:
                Path(args.out).write_text(text + "\n")
                print(f"wrote {args.out}")
            else:
                print(text)
            return 3 if suppressed else 0
    except ConfigurationError as exc:
        print(exc, file=sys.stderr)
        return 1
    except RydnoiseError as exc:
        print(exc, file=sys.stderr)
        return 2
    except np.linalg.LinAlgError as exc:
        print(exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
