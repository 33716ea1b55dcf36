"""
Noise distributions declared in a Distributions group.

Only Gauss is defined. A complex draw takes two independent samples,
one for the real part and one for the imaginary part.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass
from typing import Optional

import numpy as np

from language.document import DistDecl, attribute_value
from symbolic.env import Env
from symbolic.expr import Ident
from utils.errors import EvaluationError

#####################################
# Distribution
#####################################


@dataclass
class Distribution:
    name: str
    kind: str = "Gauss"
    mean: float = 0.0
    dev: float = 0.0

    def __post_init__(self):
        if self.dev < 0:
            raise EvaluationError(f"distribution '{self.name}' has negative dev {self.dev}")

    def draw(self, rng: np.random.Generator, complex_value: bool = False):
        if self.dev == 0.0:
            return complex(self.mean, self.mean) if complex_value else self.mean
        if complex_value:
            re = self.mean + self.dev * rng.standard_normal()
            im = self.mean + self.dev * rng.standard_normal()
            return complex(re, im)
        return self.mean + self.dev * rng.standard_normal()


def sample(dist: Distribution, rng: np.random.Generator, complex_value: bool = False):
    """One draw from dist: N(mean, dev^2), per component when complex."""
    return dist.draw(rng, complex_value)


def _resolve(raw, env: Optional[Env], what: str) -> float:
    if isinstance(raw, Ident):
        if env is None or raw.name not in env:
            raise EvaluationError(f"undeclared parameter '{raw.name}' in {what}")
        raw = env.get(raw.name)
    if isinstance(raw, complex):
        if raw.imag != 0.0:
            raise EvaluationError(f"{what} must be real, got {raw!r}")
        raw = raw.real
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise EvaluationError(f"{what} must be a number, got {raw!r}")
    return float(raw)


def build_distribution(decl: DistDecl, env: Optional[Env] = None) -> Distribution:
    """Distribution from a declaration; parameter names resolve through env."""
    mean = _resolve(attribute_value(decl.attributes, "mean", 0.0), env, f"{decl.name} mean")
    dev = _resolve(attribute_value(decl.attributes, "dev", 0.0), env, f"{decl.name} dev")
    return Distribution(decl.name, decl.kind, mean, dev)
