"""Command-line entry point: ``imisac {rate-table,ber,se,beampattern,roundtrip}``.

Every subcommand writes CSV (to ``--out`` or stdout). Exit codes: 0 on
success, 1 on a numerical failure, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from .codebook import CodebookError, scheme_rate
from .config import (DEFAULT_SCHEMES, RUN_KEYS, SCHEME_KEYS, ConfigError, Scenario, build_link,
                     build_spim, rate_params, read_config)
from .metrics import beampattern_sweep, monte_carlo_ber, se_sweep

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

DEFAULT_RATE_ROWS = (
    ("subcarrier", {"K": 8, "K_s": 5, "M": 4}),
    ("antenna", {"N": 8, "N_s": 2, "M": 1}),
    ("majorcom", {"N": 4, "K": 8, "reuse": False}),
    ("grouped", {"N": 4, "K": 4, "G": 2}),
    ("frac", {"N": 8, "N_s": 2, "K": 4, "M": 4}),
    ("fh", {"H": 2, "N": 2, "K": 3}),
    ("spim", {"L_C": 2, "L_s": 1}),
)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _scenario(args, allowed) -> Scenario:
    sc = Scenario(read_config(args.config) if args.config else {})
    sc.check_keys(allowed)
    return sc


def _seed(args, sc: Scenario) -> int:
    seed = args.seed if args.seed is not None else sc.run("seed")
    if not 0 <= seed < 1 << 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
    return seed


def _scheme_keys(scheme: str) -> set:
    return set(SCHEME_KEYS.get(scheme, {}))


def cmd_rate_table(args) -> str:
    if not args.config:
        rows = DEFAULT_RATE_ROWS
    else:
        raw = read_config(args.config)
        scheme = raw.get("scheme", "")
        sc = Scenario(raw)
        sc.check_keys({"scheme"} | _scheme_keys(scheme))
        scheme = sc.run("scheme")
        rows = ((scheme, rate_params(scheme, sc.scheme_params(scheme))),)
    out = []
    for scheme, params in rows:
        try:
            r = scheme_rate(scheme, **params)
        except CodebookError as exc:
            raise ConfigError(f"{scheme}: {exc}") from exc
        out.append((r.scheme, r.params_str, r.nominal_bits, r.exact_bits))
    return _csv(("scheme", "params", "nominal_bits", "exact_bits"), out)


def cmd_ber(args) -> str:
    raw = read_config(args.config) if args.config else {}
    scheme = raw.get("scheme", "")
    sc = Scenario(raw)
    sc.check_keys({"scheme", "seed", "trials", "snr_db"} | _scheme_keys(scheme))
    scheme = sc.run("scheme")
    link = build_link(scheme, sc.scheme_params(scheme))
    trials = sc.run("trials")
    if trials < 1:
        raise ConfigError("'trials' must be at least 1", "trials")
    res = monte_carlo_ber(link, sc.run("snr_db"), trials, _seed(args, sc), args.threads)
    return _csv(("snr_db", "ber", "ber_index", "ber_symbol", "ci"),
                [(r.snr_db, r.ber, r.ber_index, r.ber_symbol, r.ci) for r in res])


def _spim_scenario(args, extra) -> tuple[Scenario, object]:
    sc = _scenario(args, {"scheme", "seed"} | set(extra) | _scheme_keys("spim"))
    if sc.has("scheme") and sc.run("scheme") != "spim":
        raise ConfigError("this command only supports scheme = spim", "scheme")
    return sc, build_spim(sc.scheme_params("spim"))


def cmd_se(args) -> str:
    sc, cfg = _spim_scenario(args, ("snr_db", "channels"))
    snr = sc.get("snr_db", RUN_KEYS["snr_db"][0], tuple(float(s) for s in range(-20, 21, 5)))
    if any(b <= a for a, b in zip(snr, snr[1:])):
        raise ConfigError("'snr_db' must be strictly increasing", "snr_db")
    channels = sc.run("channels")
    if channels < 1:
        raise ConfigError("'channels' must be at least 1", "channels")
    sp, isac = se_sweep(cfg, channels, snr, _seed(args, sc), args.threads)
    return _csv(("snr_db", "se_spim", "se_isac"), zip(sp.axis, sp.values, isac.values))


def cmd_beampattern(args) -> str:
    sc, cfg = _spim_scenario(args, ("etas", "grid_deg"))
    etas = sc.run("etas")
    grid = sc.run("grid_deg")
    if not grid or any(abs(t) >= 90 for t in grid):
        raise ConfigError("'grid_deg' needs angles strictly inside (-90, 90)", "grid_deg")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("'grid_deg' must be strictly increasing", "grid_deg")
    if any(not 0 <= e <= 1 for e in etas):
        raise ConfigError("'etas' must lie in [0, 1]", "etas")
    sweeps = beampattern_sweep(cfg, etas, np.deg2rad(grid))
    header = ["theta_deg"] + [f"power_db_eta_{e:g}" for e in etas]
    rows = [[grid[k]] + [s.values[k] for s in sweeps] for k in range(len(grid))]
    return _csv(header, rows)


def cmd_roundtrip(args, links=None) -> tuple[str, bool]:
    """Noiseless encode/decode check; ``links`` maps scheme name to link (test doubles allowed)."""
    sc = _scenario(args, {"seed", "trials", "schemes"})
    trials = sc.run("trials")
    if trials < 1:
        raise ConfigError("'trials' must be at least 1", "trials")
    if links is None:
        names = sc.run("schemes") or tuple(DEFAULT_SCHEMES)
        for n in names:
            if n not in DEFAULT_SCHEMES:
                raise ConfigError(f"unknown scheme '{n}'", "schemes")
        links = {n: build_link(n, DEFAULT_SCHEMES[n]) for n in names}
    rows, ok = [], True
    for name, link in links.items():
        r = monte_carlo_ber(link, [math.inf], trials, _seed(args, sc), args.threads)[0]
        passed = r.errors == 0
        ok &= passed
        rows.append((name, r.trials, r.bits, r.errors, "pass" if passed else "FAIL"))
    return _csv(("scheme", "trials", "bits", "bit_errors", "result"), rows), ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imisac", description="Index-modulation ISAC experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("rate-table", "bits per channel use for each scheme"),
                        ("ber", "Monte-Carlo bit error rate versus SNR"),
                        ("se", "spectral efficiency versus SNR"),
                        ("beampattern", "transmit beampattern for several eta"),
                        ("roundtrip", "noiseless encode/decode check for every scheme")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="flat key = value scenario file")
        s.add_argument("--seed", type=int, help="overrides the config seed")
        s.add_argument("--out", help="CSV output path (default stdout)")
        s.add_argument("--threads", type=int, default=1, help="worker threads")
    return p


def main(argv=None, links=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    ok = True
    try:
        if args.command == "rate-table":
            text = cmd_rate_table(args)
        elif args.command == "ber":
            text = cmd_ber(args)
        elif args.command == "se":
            text = cmd_se(args)
        elif args.command == "beampattern":
            text = cmd_beampattern(args)
        else:
            text, ok = cmd_roundtrip(args, links)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        failed = [line.split(",")[0] for line in text.splitlines()[1:] if line.endswith("FAIL")]
        print(f"round trip failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
