"""Flat ``key = value`` scenario files and the scheme objects they describe.

Lines starting with ``#`` are comments. Lists are comma separated; an
angle grid may also be written ``start:stop:step`` (inclusive, degrees).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .antenna import AntennaImConfig, AntennaLink
from .frac_fh import FhConfig, FhLink, FracConfig, FracLink
from .freq_agile import FreqAgileConfig, FreqAgileLink
from .spim import SpimConfig, SpimLink
from .subcarrier import OfdmImConfig, SubcarrierLink


class ConfigError(ValueError):
    """Invalid scenario; ``key`` names the offending entry when there is one."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _int(v: str) -> int:
    return int(v, 0)


def _float(v: str) -> float:
    return float(v)


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _float_list(v: str) -> tuple[float, ...]:
    v = v.strip()
    if ":" in v:
        start, stop, step = (float(x) for x in v.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 12)) for i in range(n))
    return tuple(float(x) for x in v.split(",") if x.strip())


def _str_list(v: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in v.split(",") if x.strip())


# key -> (parser, default); a default of ``REQUIRED`` means the key must be given
REQUIRED = object()

SCHEME_KEYS: dict[str, dict] = {
    "subcarrier": {"K": (_int, REQUIRED), "K_s": (_int, REQUIRED), "B": (_int, 1),
                   "M": (_int, 2), "fading": (_bool, False)},
    "antenna": {"N": (_int, REQUIRED), "N_s": (_int, REQUIRED), "N_rx": (_int, 4),
                "M": (_int, 1), "L": (_int, 32), "phi_deg": (_float, 20.0)},
    "majorcom": {"N": (_int, REQUIRED), "K": (_int, REQUIRED), "reuse": (_bool, False),
                 "L": (_int, 32), "target_deg": (_float, 30.0)},
    "grouped": {"N": (_int, REQUIRED), "K": (_int, REQUIRED), "G": (_int, REQUIRED),
                "L": (_int, 32), "target_deg": (_float, 30.0)},
    "frac": {"N": (_int, REQUIRED), "N_s": (_int, REQUIRED), "K": (_int, REQUIRED),
             "M": (_int, 2), "n_rx": (_int, 1), "L": (_int, 64), "kappa": (_float, 1.0)},
    "fh": {"N": (_int, REQUIRED), "K": (_int, REQUIRED), "H": (_int, REQUIRED),
           "target_deg": (_float, 17.0), "L_hop": (_int, 16)},
    "spim": {"N": (_int, 16), "N_rx": (_int, 4), "radar_deg": (_float_list, (40.0,)),
             "user_deg": (_float_list, (50.0, 60.0)), "L_s": (_int, 1), "N_S": (_int, 1),
             "M": (_int, 4), "eta": (_float, 0.5), "sigma2": (_float, 1.0)},
}

RUN_KEYS: dict[str, tuple] = {
    "scheme": (str, REQUIRED),
    "seed": (_int, 1),
    "trials": (_int, 1000),
    "snr_db": (_float_list, REQUIRED),
    "channels": (_int, 100),
    "etas": (_float_list, (0.0, 0.5, 1.0)),
    "grid_deg": (_float_list, _float_list("-89.5:89.5:0.5")),
    "schemes": (_str_list, ()),
}


def read_config(path: str) -> dict[str, str]:
    """Raw ``key -> value`` strings; keys are case sensitive."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), delimiters=("=",))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[scenario]\n" + fh.read(), source=path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return dict(parser["scenario"])


@dataclass
class Scenario:
    raw: dict[str, str] = field(default_factory=dict)

    def has(self, key: str) -> bool:
        return key in self.raw

    def get(self, key: str, parser=None, default=REQUIRED):
        if key not in self.raw:
            if default is REQUIRED:
                raise ConfigError(f"missing required key '{key}'", key)
            return default
        parser = parser or str
        try:
            return parser(self.raw[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for '{key}': {exc}", key) from exc

    def run(self, key: str):
        parser, default = RUN_KEYS[key]
        return self.get(key, parser, default)

    def scheme_params(self, scheme: str) -> dict:
        if scheme not in SCHEME_KEYS:
            raise ConfigError(f"unknown scheme '{scheme}' (choose from {', '.join(SCHEME_KEYS)})", "scheme")
        return {k: self.get(k, p, d) for k, (p, d) in SCHEME_KEYS[scheme].items()}

    def check_keys(self, allowed) -> None:
        for key in self.raw:
            if key not in allowed:
                raise ConfigError(f"unknown key '{key}'", key)


def build_link(scheme: str, params: dict):
    """Link object for ``scheme``; scheme preconditions raise ``ConfigError``."""
    p = dict(params)
    try:
        if scheme == "subcarrier":
            fading = p.pop("fading")
            return SubcarrierLink(OfdmImConfig(**p), fading=fading)
        if scheme == "antenna":
            phi = math.radians(p.pop("phi_deg"))
            return AntennaLink(AntennaImConfig(**p), phi=phi)
        if scheme in ("majorcom", "grouped"):
            theta = math.radians(p.pop("target_deg"))
            return FreqAgileLink(FreqAgileConfig(**p), theta=theta)
        if scheme == "frac":
            return FracLink(FracConfig(**p))
        if scheme == "fh":
            theta = math.radians(p.pop("target_deg"))
            return FhLink(FhConfig(theta_r=theta, **p))
        if scheme == "spim":
            return SpimLink(build_spim(p))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{scheme}: {exc}") from exc
    raise ConfigError(f"unknown scheme '{scheme}'", "scheme")


def build_spim(params: dict) -> SpimConfig:
    p = dict(params)
    radar = tuple(math.radians(a) for a in p.pop("radar_deg"))
    user = tuple(math.radians(a) for a in p.pop("user_deg"))
    for key, angles in (("radar_deg", radar), ("user_deg", user)):
        if not angles or any(abs(a) >= math.pi / 2 for a in angles):
            raise ConfigError(f"'{key}' needs angles strictly inside (-90, 90)", key)
    try:
        return SpimConfig(radar_angles=radar, user_angles=user, **p)
    except ValueError as exc:
        raise ConfigError(f"spim: {exc}") from exc


# desk-scale settings used by the round-trip command
DEFAULT_SCHEMES: dict[str, dict] = {
    "subcarrier": {"K": 8, "K_s": 5, "B": 2, "M": 4, "fading": True},
    "antenna": {"N": 6, "N_s": 2, "N_rx": 4, "M": 2, "L": 32, "phi_deg": 20.0},
    "majorcom": {"N": 4, "K": 8, "reuse": False, "L": 32, "target_deg": 30.0},
    "grouped": {"N": 4, "K": 4, "G": 2, "L": 32, "target_deg": 30.0},
    "frac": {"N": 8, "N_s": 2, "K": 4, "M": 4, "n_rx": 1, "L": 64, "kappa": 1.0},
    "fh": {"N": 2, "K": 3, "H": 2, "target_deg": 17.0, "L_hop": 16},
    "spim": {"N": 16, "N_rx": 4, "radar_deg": (40.0,), "user_deg": (50.0, 60.0), "L_s": 1,
             "N_S": 1, "M": 4, "eta": 0.5, "sigma2": 1.0},
}


def rate_params(scheme: str, params: dict) -> dict:
    """The subset of scheme parameters that fixes the bit rate."""
    keep = {"subcarrier": ("K", "K_s", "M"), "antenna": ("N", "N_s", "M"),
            "majorcom": ("N", "K", "reuse"), "grouped": ("N", "K", "G"),
            "frac": ("N", "N_s", "K", "M"), "fh": ("H", "N", "K")}
    if scheme == "spim":
        return {"L_C": len(params["user_deg"]), "L_s": params["L_s"]}
    return {k: params[k] for k in keep[scheme]}


def default_link(scheme: str):
    return build_link(scheme, DEFAULT_SCHEMES[scheme])
