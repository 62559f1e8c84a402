"""Command-line entry point.

Examples::

    gpebohm preset fig3a fig3d --out runs/
    gpebohm --jobs 3 preset fig5a fig5b fig5c
    gpebohm run my_scenario.json --out runs/custom
    gpebohm oracle widths
    gpebohm --dump-potential --out runs/
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io, oracle
from .grid import effective_frequency, effective_omega, effective_width
from .scenarios import (PRESETS, TRAP_ELLS, ConfigError, ScenarioConfig, potential_table, run_preset,
                        run_scenario, write_outputs)
from .units import PhysicalParams, derive_coupling, rescale

log = logging.getLogger("gpebohm")

ORACLE_TABLES = ("params", "widths", "fringes")


def oracle_table(name: str, p: PhysicalParams | None = None) -> tuple[list[str], list[list[float]]]:
    """Header and rows of one of the closed-form tables."""
    p = p or PhysicalParams()
    s = rescale(p)
    if name == "params":
        g1d, a_perp = derive_coupling(p)
        sigma_eff = effective_width(effective_frequency(p), p.mass_kg)
        header = ["a_perp_nm", "g1d_si", "g1d_bar", "m_bar", "omega_z_bar", "tau_free_ms", "sigma_c_um"]
        row = [a_perp * 1e9, g1d, s.g1d_bar, s.m_bar, s.omega_z_bar,
               oracle.spread_time(sigma_eff, s.m_bar), oracle.coherent_width(s.m_bar, s.omega_z_bar)]
        return header, [row]
    if name == "widths":
        rows = []
        for ell in TRAP_ELLS.values():
            q = p.with_(ell_um=ell)
            f = effective_frequency(q)
            rows.append([ell, f, effective_width(f, q.mass_kg),
                         oracle.quarter_period_width(effective_omega(q) * 1e-3, s.omega_z_bar, s.m_bar)])
        return ["ell_um", "f_eff_hz", "sigma_eff_um", "sigma_quarter_um"], rows
    if name == "fringes":
        sigma0 = effective_width(effective_frequency(p), p.mass_kg)
        rows = [[t, oracle.fringe_spacing(t, sigma0, p.ell_um, s.m_bar),
                 oracle.fringe_spacing_asymptotic(t, p.ell_um, s.m_bar)]
                for t in (0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0)]
        return ["t_ms", "spacing_um", "spacing_asymptotic_um"], rows
    raise ValueError(f"unknown oracle table {name!r}; choose from {', '.join(ORACLE_TABLES)}")


def _preset_job(name: str, out: str, extra: tuple[str, ...]) -> str:
    run_preset(name, out, extra, cache={})
    return name


def _common(defaults: bool) -> argparse.ArgumentParser:
    # shared by the top level and every subcommand; subparsers suppress
    # defaults so an option given before the subcommand is not overwritten
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=d("runs"), help="output directory (default: runs)")
    p.add_argument("--jobs", type=int, default=d(1), help="presets run in parallel (default: 1)")
    p.add_argument("--dump-potential", action="store_true", default=d(False),
                   help="also write potential.csv (z, V_trap, V_latt, V_ext)")
    p.add_argument("-v", "--verbose", action="count", default=d(0))
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpebohm", description=__doc__.split("\n\n")[0],
                                 parents=[_common(True)])
    common = [_common(False)]
    sub = ap.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a scenario from a JSON config", parents=common)
    run.add_argument("config", type=Path)

    pre = sub.add_parser("preset", help="run named figure presets", parents=common)
    pre.add_argument("names", nargs="*", metavar="NAME", help="preset names, or 'all'")
    pre.add_argument("--list", action="store_true", help="list the available presets")

    orc = sub.add_parser("oracle", help="print a closed-form table as CSV", parents=common)
    orc.add_argument("table", choices=ORACLE_TABLES)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    extra = ("potential",) if args.dump_potential else ()
    out = Path(args.out)

    if args.command is None:
        if not args.dump_potential:
            ap.print_help()
            return 2
        out.mkdir(parents=True, exist_ok=True)
        tab = potential_table(ScenarioConfig())
        io.write_table(out / "potential.csv", list(tab), list(tab.values()))
        print(out / "potential.csv")
        return 0

    if args.command == "oracle":
        header, rows = oracle_table(args.table)
        print(",".join(header))
        for r in rows:
            print(",".join(io.FLOAT_FMT % v for v in r))
        return 0

    if args.command == "run":
        try:
            cfg = ScenarioConfig.from_json(args.config)
        except ConfigError as exc:
            print(exc, file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"cannot read {args.config}: {exc}", file=sys.stderr)
            return 2
        write_outputs(run_scenario(cfg), out, extra)
        print(out)
        return 0

    # preset
    if args.list:
        for name in sorted(PRESETS):
            labels = [l for l in PRESETS[name] if l]
            print(name + (f"  ({', '.join(labels)})" if labels else ""))
        return 0
    names = sorted(PRESETS) if args.names == ["all"] else args.names
    unknown = [n for n in names if n not in PRESETS]
    if unknown or not names:
        print(f"unknown preset(s): {', '.join(unknown) or '(none given)'}", file=sys.stderr)
        return 2
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for done in pool.map(_preset_job, names, [str(out)] * len(names), [extra] * len(names)):
                print(out / done)
    else:
        cache: dict = {}
        for name in names:
            run_preset(name, out, extra, cache)
            print(out / name)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
