"""
Model Defaults
Reserved words, attribute defaults and builtin function table of the
modeling language.
"""

import math

# Group keywords open a section of a model file
GROUP_KEYWORDS = (
    "Header",
    "Model",
    "Vars",
    "Params",
    "NLEs",
    "WLSEs",
    "ECs",
    "Limits",
    "Repeats",
    "ReInit",
    "PreProc",
    "PostProc",
    "IterPostP",
    "BasePostP",
    "SubModel",
    "Distributions",
)

# Statement-level keywords
STATEMENT_KEYWORDS = ("if", "else", "switch", "case", "default", "group", "end", "repeat")

RESERVED_WORDS = frozenset(GROUP_KEYWORDS + STATEMENT_KEYWORDS)

# Names the expression parser turns into constants
BUILTIN_CONSTANTS = {
    "e": math.e,
    "pi": math.pi,
    "true": True,
    "false": False,
}

# Header attributes
HEADER_DEFAULTS = {
    "maxIter": 100,
    "maxReps": 100,
    "report": "Solved",
}

# Model / SubModel attributes
MODEL_DEFAULTS = {
    "type": "NL",
    "domain": "real",
    "eps": 1e-6,
    "name": "",
    "reInit": False,
    "maxIter": None,  # falls back to the header value
    "copyPars": 0,
    "alwaysOn": False,
}

REPORT_LEVELS = ("Solved", "All", "AllDetails")

MODEL_TYPES = ("NL", "WLS")

DOMAIN_SYNONYMS = {
    "real": "real",
    "cplx": "complex",
    "cmplx": "complex",
    "complex": "complex",
}

PARAM_TYPES = ("real", "complex", "int", "bool")

DISTRIBUTION_KINDS = ("Gauss",)

ASSIGN_OPERATORS = ("=", "+=", "-=", "*=", "/=", "^=")

# Builtin functions and their arity
FUNCTION_ARITY = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "asin": 1,
    "acos": 1,
    "atan": 1,
    "sqrt": 1,
    "exp": 1,
    "log": 1,
    "abs": 1,
    "sign": 1,
    "conj": 1,
    "real": 1,
    "imag": 1,
    "round": 2,
    "disc": 3,
    "rnd": 1,
}

# Functions that may only appear in assignment expressions
NON_SMOOTH_FUNCTIONS = frozenset({"round", "disc", "rnd"})

# Functions whose value is always real
REAL_VALUED_FUNCTIONS = frozenset({"abs", "real", "imag", "round", "disc", "sign"})


def get_model_default(name: str):
    """Get the default for a Model/SubModel attribute"""
    return MODEL_DEFAULTS.get(name)


def get_header_default(name: str):
    """Get the default for a Header attribute"""
    return HEADER_DEFAULTS.get(name)


def normalize_domain(text: str) -> str:
    """Map a domain spelling (cplx, cmplx, complex, real) to real|complex"""
    return DOMAIN_SYNONYMS.get(str(text).strip().lower(), "")


def is_reserved(name: str) -> bool:
    """True when a name may not be used for a variable or parameter"""
    return name in RESERVED_WORDS or name in BUILTIN_CONSTANTS
