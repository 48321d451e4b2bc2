"""INI experiment files: one ``[potential]`` section, one ``[experiment]`` section and
optional per-module sections whose keys become experiment options.

    [potential]
    family = drifted_brownian
    delta = 3

    [experiment]
    kind = moment-check
    samples = 100000
    step = 0.001
    seed = 7

    [gou]
    moment = Z_t
    z0 = 1
    t = 1
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .potential import PotentialSpec

OPTION_SECTIONS = ("potential", "functionals", "gou", "diffusion", "limits", "harness")


@dataclass
class FileConfig:
    spec: PotentialSpec | None = None
    experiment: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def coerce(text: str):
    """``"3"`` -> 3, ``"1e-3"`` -> 0.001, ``"5, 10"`` -> [5, 10], anything else stays a string."""
    text = text.strip()
    if "," in text:
        return [coerce(part) for part in text.split(",") if part.strip()]
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_potential(text: str) -> PotentialSpec:
    """``family:key=value,...``, e.g. ``drift_minus_cp:c=1,a=3,b=1``."""
    family, _, rest = text.partition(":")
    data = {"family": family.strip()}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed potential parameter {item!r} (expected key=value)")
        data[key.strip()] = float(value)
    try:
        return PotentialSpec.from_dict(data)
    except KeyError as exc:
        raise ValueError(f"potential family {family!r} is missing parameter {exc.args[0]!r}") from None


def load_config(path) -> FileConfig:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    out = FileConfig()
    if parser.has_section("potential"):
        data = dict(parser.items("potential"))
        try:
            out.spec = PotentialSpec.from_dict(data)
        except KeyError as exc:
            raise ValueError(f"[potential] is missing {exc.args[0]!r}") from None
    if parser.has_section("experiment"):
        out.experiment = {k: coerce(v) for k, v in parser.items("experiment")}
    for section in parser.sections():
        if section in ("potential", "experiment"):
            continue
        if section not in OPTION_SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        out.options.update({k: coerce(v) for k, v in parser.items(section)})
    return out
