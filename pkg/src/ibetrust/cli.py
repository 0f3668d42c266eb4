"""Command-line front end: key generation, simulation runs, report re-rendering.

Exit codes: 0 success, 1 internal error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ibe, sim
from .energy import DEFAULT_CONSTANTS, EnergyConstants
from .errors import ConfigError

PARAMS_FILE = "params.bin"
MASTER_FILE = "master.bin"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibetrust",
        description="identity-based trusted authentication simulator "
                    "for wireless sensor networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    keygen = sub.add_parser("keygen", help="generate system parameters and node keys")
    keygen.add_argument("--profile", choices=sorted(ibe.PROFILES), default="toy")
    keygen.add_argument("--seed", type=int, default=0,
                        help="master key generation seed (default 0)")
    keygen.add_argument("--out-dir", required=True, type=Path)
    keygen.add_argument("--ids", nargs="*", default=[],
                        help="node identities to extract key files for")

    runp = sub.add_parser("run", help="run a scenario and emit the report")
    runp.add_argument("--scenario", required=True,
                      help="path to a scenario file or a bundled name "
                           f"({', '.join(sim.bundled_scenarios())})")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the scenario's run seed")
    runp.add_argument("--out", type=Path, help="write the full report as JSON")
    runp.add_argument("--csv", type=Path, help="write the energy tables as CSV")
    runp.add_argument("--keys", type=Path,
                      help="directory holding params.bin and master.bin from keygen")
    runp.add_argument("--constants", type=Path,
                      help="energy constants file (JSON, partial overrides)")
    runp.add_argument("--verbose", action="store_true",
                      help="include the per-frame event stream in stdout")

    rep = sub.add_parser("report", help="re-render a saved report file")
    rep.add_argument("--in", dest="infile", required=True, type=Path)
    return parser


def _cmd_keygen(args) -> int:
    config = ibe.SecurityConfig.from_profile(args.profile, seed=args.seed)
    params, master = ibe.setup(config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / PARAMS_FILE).write_bytes(ibe.params_to_bytes(params))
    (args.out_dir / MASTER_FILE).write_bytes(ibe.master_key_to_bytes(master))
    written = [PARAMS_FILE, MASTER_FILE]
    for identity in args.ids:
        key = ibe.extract(params, master, identity)
        name = identity + ".key"
        (args.out_dir / name).write_bytes(ibe.private_key_to_bytes(params, key))
        written.append(name)
    print(f"profile {args.profile}: wrote {', '.join(written)} to {args.out_dir}")
    return 0


def _load_keys(keys_dir: Path) -> tuple[ibe.PublicParams, ibe.MasterKey]:
    params_path = keys_dir / PARAMS_FILE
    master_path = keys_dir / MASTER_FILE
    for path in (params_path, master_path):
        if not path.is_file():
            raise ConfigError(f"missing key material file: {path}")
    params = ibe.params_from_bytes(params_path.read_bytes())
    master = ibe.master_key_from_bytes(params, master_path.read_bytes())
    return params, master


def _cmd_run(args) -> int:
    scenario = sim.load_scenario(args.scenario)
    constants = DEFAULT_CONSTANTS
    if args.constants is not None:
        if not args.constants.is_file():
            raise ConfigError(f"constants file not found: {args.constants}")
        constants = EnergyConstants.from_file(args.constants)
    keys = _load_keys(args.keys) if args.keys is not None else None
    report = sim.run(scenario, seed=args.seed, constants=constants, keys=keys)
    data = report.to_dict()
    if args.out is not None:
        args.out.write_text(report.to_json())
    if args.csv is not None:
        args.csv.write_text(data["energy_csv"])
    shown = dict(data)
    if not args.verbose:
        shown["event_log"] = ["(rerun with --verbose, or see --out, for the event stream)"]
    print(sim.render_report_dict(shown))
    return 0


def _cmd_report(args) -> int:
    if not args.infile.is_file():
        raise ConfigError(f"report file not found: {args.infile}")
    try:
        data = json.loads(args.infile.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.infile}: not a report file ({exc.msg})") from exc
    required = {"scenario", "final_phases", "event_log", "energy_text"}
    if not isinstance(data, dict) or not required <= set(data):
        raise ConfigError(f"{args.infile}: not a report file")
    print(sim.render_report_dict(data))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"keygen": _cmd_keygen, "run": _cmd_run, "report": _cmd_report}
    try:
        return handler[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
