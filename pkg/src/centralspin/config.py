"""TOML run configuration.

Homogeneous bath::

    [system]
    omega = 1.0
    theta0 = 1.5707963267948966

    [bath]
    n = 10
    omega = 1.0
    lambda = 0.05
    # optional shared initial state [a0_re, a0_im, a1_re, a1_im]
    # state = [0.7071067811865476, 0.0, 0.7071067811865476, 0.0]

Heterogeneous bath: replace n/omega/lambda by rows of
(omega, lambda, a0_re, a0_im, a1_re, a1_im)::

    [bath]
    spins = [[1.0, 0.1, 0.7071067811865476, 0, 0.7071067811865476, 0],
             [0.8, 0.3, 1, 0, 0, 0]]
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .model import SQRT_HALF, BathModel, CentralSpinParams, bath_from_rows


class ConfigError(ValueError):
    pass


DEFAULT_SYSTEM = {"omega": 1.0, "theta0": math.pi / 2}
DEFAULT_BATH = {"n": 10, "omega": 1.0, "lambda": 0.05}


@dataclass(frozen=True)
class RunConfig:
    central: CentralSpinParams
    bath: BathModel
    source: str | None = None


def parse_config(data: dict, source: str | None = None) -> RunConfig:
    unknown = set(data) - {"system", "bath"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    system = {**DEFAULT_SYSTEM, **data.get("system", {})}
    bath_cfg = data.get("bath", {})
    try:
        central = CentralSpinParams(float(system["omega"]), float(system["theta0"]))
        if "spins" in bath_cfg:
            extra = set(bath_cfg) - {"spins"}
            if extra:
                raise ConfigError(f"bath.spins cannot be combined with {', '.join(sorted(extra))}")
            bath = bath_from_rows(bath_cfg["spins"])
        else:
            merged = {**DEFAULT_BATH, **bath_cfg}
            amp0 = amp1 = SQRT_HALF
            if "state" in merged:
                a0r, a0i, a1r, a1i = (float(x) for x in merged["state"])
                amp0, amp1 = complex(a0r, a0i), complex(a1r, a1i)
            bath = BathModel.homogeneous(int(merged["n"]), float(merged["omega"]),
                                         float(merged["lambda"]), amp0, amp1)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(central, bath, source)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, str(path))
