"""Benchmark environments; importing this package registers all of them."""

from __future__ import annotations

from . import cmaes, luby, sgd, sigmoid
from .cmaes import CmaEsEnv
from .luby import LubyEnv
from .sgd import SgdEnv
from .sigmoid import SigmoidEnv

__all__ = [
    "CmaEsEnv",
    "LubyEnv",
    "SgdEnv",
    "SigmoidEnv",
    "cmaes",
    "luby",
    "sgd",
    "sigmoid",
]
