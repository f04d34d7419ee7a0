"""Command-line front end.

Commands: ``sweep`` (grid PSR heatmap + area report), ``defense-eval`` /
``attack-eval`` (symbol-level defense x attack matrices), ``report``
(aggregate sweep reports into one area table). Settings resolve as
defaults < config file (--config, JSON) < SIDELOBE_* environment variables
< command-line flags. Exit codes: 0 ok, 1 usage/config error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields

from .arraymodel import PhasedArray, apply_artifacts, measured_like
from .attack import evaluate_pair, parse_attack
from .defense import parse_defense
from .errors import ConfigurationError
from .scenario import PRESET_NAMES, preset
from .sweep import (DEFAULT_THRESHOLDS, area_vs_threshold_curve, dump_json,
                    grid_csv_text, report_document, sweep_psr)
from . import __version__

ENV_PREFIX = "SIDELOBE_"

# Curated Table-3-style evaluation pairs used when no --defense/--attack given.
DEFAULT_EVAL_PAIRS = (
    ("none", "single"),
    ("antenna:flip:symbol", "single"),
    ("antenna:flip:symbol", "derand:devices=4"),
    ("antenna:disable:packet", "single"),
    ("rfchain:chains=1:power=0", "single"),
    ("rfchain:chains=1:power=0", "cancel"),
    ("rfchain:chains=3:power=0", "cancel"),
)


@dataclass
class RunConfig:
    scenario: str = "mesh"
    antennas: str = "16x8"  # horizontal x vertical element counts
    artifacts: str = "none"  # none | preset
    rate: float | None = None  # Gbps; defaults to the scenario's rated max
    attacker_height: float = 1.0
    thresholds: tuple = DEFAULT_THRESHOLDS
    defenses: tuple = ()
    attacks: tuple = ()
    symbols: int = 20000
    victim_snr: float = 20.0
    seed: int = 0
    out: str = "out"

    def echo(self) -> dict:
        d = asdict(self)
        d["thresholds"] = list(self.thresholds)
        d["defenses"] = list(self.defenses)
        d["attacks"] = list(self.attacks)
        d["version"] = __version__
        return d


_LIST_KEYS = {"thresholds", "defenses", "attacks"}
_CASTS = {
    "rate": float, "attacker_height": float, "victim_snr": float,
    "symbols": int, "seed": int,
}


def _coerce(key: str, value):
    if key in _LIST_KEYS:
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        if key == "thresholds":
            return tuple(float(v) for v in value)
        return tuple(str(v) for v in value)
    cast = _CASTS.get(key)
    return cast(value) if cast is not None else value


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, SIDELOBE_* env vars, and CLI flags."""
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                loaded = json.load(fh)
        except OSError as e:
            raise IOError(f"cannot read config file {config_path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config file {config_path} is not valid JSON: {e}")
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in known:
                raise ConfigurationError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
    for key in known:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            merged[key] = _coerce(key, env)
    for key in known:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = _coerce(key, flag)
    cfg = RunConfig(**merged)
    if cfg.scenario not in PRESET_NAMES:
        raise ConfigurationError(
            f"scenario must be one of {', '.join(PRESET_NAMES)}, got {cfg.scenario!r}")
    if list(cfg.thresholds) != sorted(cfg.thresholds):
        raise ConfigurationError("thresholds must be sorted ascending")
    return cfg


def build_array(cfg: RunConfig) -> PhasedArray:
    """Array from an "HxV" antenna spec plus the artifact setting."""
    try:
        h, v = cfg.antennas.lower().split("x")
        array = PhasedArray(rows=int(v), cols=int(h))
    except (ValueError, TypeError):
        raise ConfigurationError(
            f"antennas must look like '16x8' (horizontal x vertical), "
            f"got {cfg.antennas!r}")
    if cfg.artifacts == "preset":
        array = apply_artifacts(array, measured_like(seed=cfg.seed))
    elif cfg.artifacts != "none":
        raise ConfigurationError(
            f"artifacts must be 'none' or 'preset', got {cfg.artifacts!r}")
    return array


def _variant(cfg: RunConfig) -> str:
    return "perfect" if cfg.artifacts == "none" else "artifacts"


def _write(path: str, text: str):
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise IOError(f"cannot write {path}: {e}") from e


def cmd_sweep(cfg: RunConfig) -> list[str]:
    array = build_array(cfg)
    scen = preset(cfg.scenario, attacker_height_m=cfg.attacker_height,
                  rate_gbps=cfg.rate, calibration_array=array)
    grid = sweep_psr(scen, array, scen.rate)
    params = cfg.echo()
    params["command"] = "sweep"
    params["rate"] = scen.rate.rate_gbps
    params["snr50_db"] = round(scen.rate.snr50_db, 6)
    curve = area_vs_threshold_curve(grid, cfg.thresholds, parameters=params)
    stem = f"{scen.name}_{scen.rate.rate_gbps:.1f}gbps_{_variant(cfg)}"
    csv_path = os.path.join(cfg.out, stem + ".csv")
    json_path = os.path.join(cfg.out, stem + "_report.json")
    _write(csv_path, grid_csv_text(grid))
    doc = report_document(grid, curve, scen.rate.rate_gbps, _variant(cfg))
    _write(json_path, dump_json(doc))
    areas = ", ".join(f">{t:g}: {a:.2f} m^2" for t, a in curve.areas_m2.items())
    print(f"{stem}: {areas}")
    return [csv_path, json_path]


def _eval_rows(cfg: RunConfig, pairs) -> list[dict]:
    array = build_array(cfg)
    rows = []
    for d_text, a_text in pairs:
        defense = parse_defense(d_text, n_elements=array.size)
        attack = parse_attack(a_text)
        row = evaluate_pair(array, defense, attack, symbol_count=cfg.symbols,
                            victim_snr_db=cfg.victim_snr, seed=cfg.seed)
        row["attacker_ser"] = round(row["attacker_ser"], 6)
        row["victim_ser"] = round(row["victim_ser"], 6)
        row["attacker_psr"] = round(row["attacker_psr"], 6)
        if row.get("mask_accuracy") is not None:
            row["mask_accuracy"] = round(row["mask_accuracy"], 6)
        rows.append(row)
        print(f"{row['defense']:42s} vs {row['attack']:18s} "
              f"SER={row['attacker_ser']:.4f} PSR={row['attacker_psr']:.4f} "
              f"victim SER={row['victim_ser']:.4f}")
    return rows


def cmd_defense_eval(cfg: RunConfig) -> str:
    if cfg.defenses and cfg.attacks:
        pairs = [(d, a) for d in cfg.defenses for a in cfg.attacks]
    elif cfg.defenses or cfg.attacks:
        raise ConfigurationError("give both --defense and --attack, or neither")
    else:
        pairs = DEFAULT_EVAL_PAIRS
    doc = {"results": _eval_rows(cfg, pairs), "parameters": cfg.echo()}
    doc["parameters"]["command"] = "defense-eval"
    path = os.path.join(cfg.out, "defense_eval.json")
    _write(path, dump_json(doc))
    return path


def cmd_attack_eval(cfg: RunConfig) -> str:
    defense = cfg.defenses[0] if cfg.defenses else "none"
    attacks = cfg.attacks or ("single",)
    pairs = [(defense, a) for a in attacks]
    doc = {"results": _eval_rows(cfg, pairs), "parameters": cfg.echo()}
    doc["parameters"]["command"] = "attack-eval"
    path = os.path.join(cfg.out, "attack_eval.json")
    _write(path, dump_json(doc))
    return path


PREFERRED_TABLE_THRESHOLDS = ("0.1", "0.5", "0.95")


def cmd_report(cfg: RunConfig, inputs: list[str]) -> str:
    if not inputs:
        raise ConfigurationError("report needs at least one sweep report file")
    missing = [p for p in inputs if not os.path.exists(p)]
    if missing:
        raise IOError("missing input files: " + ", ".join(missing))
    table = {}
    common = None
    for path in inputs:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise IOError(f"cannot read report {path}: {e}") from e
        label = f"{doc['scenario']}_{doc['rate_gbps']:.1f}gbps_{doc['variant']}"
        table[label] = doc["areas_m2"]
        keys = set(doc["areas_m2"])
        common = keys if common is None else common & keys
    if all(t in common for t in PREFERRED_TABLE_THRESHOLDS):
        columns = list(PREFERRED_TABLE_THRESHOLDS)
    else:
        columns = sorted(common, key=float)
    doc = {
        "columns": columns,
        "areas_m2": {label: {t: areas[t] for t in columns}
                     for label, areas in sorted(table.items())},
        "inputs": sorted(inputs),
        "parameters": cfg.echo() | {"command": "report"},
    }
    path = os.path.join(cfg.out, "area_table.json")
    _write(path, dump_json(doc))
    header = "scenario".ljust(32) + "".join(f">{c}".rjust(12) for c in columns)
    print(header)
    for label, areas in sorted(doc["areas_m2"].items()):
        print(label.ljust(32) + "".join(f"{areas[c]:12.2f}" for c in columns))
    return path


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2 (2 is for I/O here)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def make_parser() -> _Parser:
    p = _Parser(prog="sidelobe",
                description="mmWave side-lobe eavesdropping simulator")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--antennas", help="TX elements, horizontal x vertical (16x8)")
        sp.add_argument("--artifacts", choices=["none", "preset"])
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("sweep", parents=[], help="grid PSR sweep for a scenario")
    common(sp)
    sp.add_argument("--scenario", choices=list(PRESET_NAMES))
    sp.add_argument("--rate", type=float, help="link rate in Gbps")
    sp.add_argument("--attacker-height", dest="attacker_height", type=float)
    sp.add_argument("--thresholds", help="comma-separated PSR thresholds")

    for name, fn in (("defense-eval", cmd_defense_eval),
                     ("attack-eval", cmd_attack_eval)):
        sp = sub.add_parser(name, help=f"{name.replace('-', ' ')} matrix")
        common(sp)
        sp.add_argument("--defense", dest="defenses", action="append",
                        help="defense spec, repeatable (antenna:flip:k=32:m=256:symbol)")
        sp.add_argument("--attack", dest="attacks", action="append",
                        help="attack spec, repeatable (single, derand:devices=4, cancel)")
        sp.add_argument("--symbols", type=int)
        sp.add_argument("--victim-snr", dest="victim_snr", type=float)
        sp.set_defaults(_fn=fn)

    sp = sub.add_parser("report", help="aggregate sweep reports into one table")
    common(sp)
    sp.add_argument("inputs", nargs="*", help="sweep report JSON files")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "sweep":
            cmd_sweep(cfg)
        elif args.command == "report":
            cmd_report(cfg, list(args.inputs))
        else:
            args._fn(cfg)
    except (ConfigurationError, ValueError) as e:
        print(f"sidelobe: error: {e}", file=sys.stderr)
        return 1
    except (IOError, OSError) as e:
        print(f"sidelobe: i/o error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
