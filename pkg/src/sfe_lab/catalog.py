"""The shipped corpus of function tables and protocols."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dsl import ProtocolSpec, load_protocol
from .functions import FunctionTable, load_function

FUNCTIONS = ("max", "or", "spiral", "weave", "const2")

# protocol name -> function table it computes (or is analysed against)
PROTOCOLS = {
    "max-plain": "max",
    "leaky": "spiral",
    "masked-leaky": "spiral",
    "bob-first": "spiral",
    "coin": "spiral",
    "shared-nonce": "const2",
    "collide": "const2",
}


def corpus_dir() -> Path:
    return Path(str(resources.files("sfe_lab") / "corpus"))


def function_path(name: str) -> Path:
    return corpus_dir() / f"{name}.fn"


def protocol_path(name: str) -> Path:
    return corpus_dir() / f"{name}.sfe"


def function(name: str) -> FunctionTable:
    return load_function(function_path(name))


def protocol(name: str) -> ProtocolSpec:
    return load_protocol(protocol_path(name))


def pairs() -> list[tuple[str, FunctionTable, ProtocolSpec]]:
    """Every (protocol name, function, protocol) pair in the corpus."""
    return [(p, function(fn), protocol(p)) for p, fn in PROTOCOLS.items()]
