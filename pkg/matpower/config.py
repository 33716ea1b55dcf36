"""
Converter Configuration
Reads the XML file that controls MATPOWER conversion.

    <config>
      <options>
        <format>polar</format>          polar | rectangular | complex
        <symbols>greek</symbols>        greek | ascii
        <eps>1e-10</eps>
        <maxIter>50</maxIter>
        <report>Solved</report>
      </options>
      <variables out="true"/>
      <limits qLimits="false"/>
      <loads>
        <P z="0" i="0" p="1"/>
        <Q z="0" i="0" p="1"/>
      </loads>
    </config>

Every element is optional; missing values keep their defaults.
"""

#####################################
# Import Modules
#####################################

import math
import pathlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

from utils.errors import ConfigError
from utils.utils_logger import logger

#####################################
# Default Configurations
#####################################

FORMATS = ("polar", "rectangular", "complex")
SYMBOLS = ("greek", "ascii")
REPORT_LEVELS = ("Solved", "All", "AllDetails")

Zip = Tuple[float, float, float]


@dataclass(frozen=True)
class ConvertOptions:
    format: str = "polar"
    symbols: str = "greek"
    enforce_q_limits: bool = False
    zip_p: Zip = (0.0, 0.0, 1.0)
    zip_q: Zip = (0.0, 0.0, 1.0)
    eps: float = 1e-10
    max_iter: int = 50
    report: str = "Solved"
    out: bool = True

    @property
    def constant_power(self) -> bool:
        return self.zip_p == (0.0, 0.0, 1.0) and self.zip_q == (0.0, 0.0, 1.0)

    def with_overrides(self, **changes) -> "ConvertOptions":
        """Copy with the non-None keyword values applied, then re-checked."""
        options = replace(self, **{k: v for k, v in changes.items() if v is not None})
        check_options(options)
        return options


#####################################
# Helper Functions
#####################################


def _flag(text: str, where: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{where}: expected true or false, found '{text}'")


def _number(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, found '{text}'") from None


def _option(options: Optional[ET.Element], tag: str) -> Optional[str]:
    if options is None:
        return None
    element = options.find(tag)
    if element is None or element.text is None:
        return None
    return element.text.strip()


def _zip(loads: Optional[ET.Element], tag: str) -> Zip:
    if loads is None or loads.find(tag) is None:
        return (0.0, 0.0, 1.0)
    element = loads.find(tag)
    return tuple(
        _number(element.get(part, "0"), f"loads/{tag}@{part}") for part in ("z", "i", "p")
    )


def check_options(options: ConvertOptions) -> None:
    if options.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}, found '{options.format}'")
    if options.symbols not in SYMBOLS:
        raise ConfigError(f"symbols must be one of {', '.join(SYMBOLS)}, found '{options.symbols}'")
    if options.report not in REPORT_LEVELS:
        raise ConfigError(f"report must be one of {', '.join(REPORT_LEVELS)}, found '{options.report}'")
    for label, fractions in (("P", options.zip_p), ("Q", options.zip_q)):
        if any(f < 0 for f in fractions):
            raise ConfigError(f"ZIP fractions for {label} must be non-negative: {fractions}")
        if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
            raise ConfigError(f"ZIP fractions for {label} must sum to 1, found {sum(fractions)}")
    if options.eps <= 0:
        raise ConfigError("eps must be positive")
    if options.max_iter < 1:
        raise ConfigError("maxIter must be at least 1")


#####################################
# Public Functions
#####################################


def load_config(text: str) -> ConvertOptions:
    """Parse converter configuration markup into ConvertOptions."""
    if not text.strip():
        return ConvertOptions()
    try:
        # bytes, so an XML declaration naming an encoding is accepted
        root = ET.fromstring(text.encode("utf-8"))
    except ET.ParseError as e:
        raise ConfigError(f"malformed configuration: {e}") from None

    options = root.find("options")
    changes = {
        "format": _option(options, "format"),
        "symbols": _option(options, "symbols"),
        "report": _option(options, "report"),
    }
    eps = _option(options, "eps")
    if eps is not None:
        changes["eps"] = _number(eps, "options/eps")
    max_iter = _option(options, "maxIter")
    if max_iter is not None:
        changes["max_iter"] = int(_number(max_iter, "options/maxIter"))

    variables = root.find("variables")
    if variables is not None and variables.get("out") is not None:
        changes["out"] = _flag(variables.get("out"), "variables@out")
    limits = root.find("limits")
    if limits is not None and limits.get("qLimits") is not None:
        changes["enforce_q_limits"] = _flag(limits.get("qLimits"), "limits@qLimits")

    loads = root.find("loads")
    changes["zip_p"] = _zip(loads, "P")
    changes["zip_q"] = _zip(loads, "Q")
    return ConvertOptions().with_overrides(**changes)


def read_config(path: Union[str, pathlib.Path]) -> ConvertOptions:
    path = pathlib.Path(path)
    options = load_config(path.read_text(encoding="utf-8"))
    logger.info(f"Converter options from {path.name}: {options}")
    return options
