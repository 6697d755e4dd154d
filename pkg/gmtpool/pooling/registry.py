from __future__ import annotations

"""READOUT registry.

Builtin readouts register themselves from :mod:`gmtpool.pooling.readouts`;
third-party packages add more through the ``gmtpool.readouts`` entry-point
group (the entry point only has to be importable, registration happens as an
import side effect).
"""

from dataclasses import dataclass
from importlib.metadata import entry_points
from typing import Any, Callable, Dict

import numpy as np
from loguru import logger

from gmtpool.errors import ConfigError

ENTRY_POINT_GROUP = "gmtpool.readouts"

_REGISTRY: Dict[str, Dict[str, Any]] = {}


@dataclass
class ReadoutSpec:
    """Everything a readout factory may need besides the embedding width."""

    rng: np.random.Generator
    k: int = 1
    ratio: float = 0.25
    heads: int = 4
    scale: bool = True
    dropout: float = 0.0


def get_registry() -> Dict[str, Dict[str, Any]]:
    """Return a copy of the internal readout registry."""
    return _REGISTRY.copy()


def register_readout(name: str, description: str):
    """Decorator registering ``factory(dim, spec) -> Module`` under *name*.

    Example:
        @register_readout("max", "Per-graph maximum over node rows")
        def build_max(dim: int, spec: ReadoutSpec) -> Module:
            return MaxPool(dim)
    """

    def _decorator(factory: Callable):
        _REGISTRY[name] = {"factory": factory, "description": description}
        return factory

    return _decorator


def discover() -> Dict[str, Dict[str, Any]]:
    """Populate the registry from the builtin module and entry points; return it."""
    import importlib

    importlib.import_module("gmtpool.pooling.readouts")

    for ep in entry_points(group=ENTRY_POINT_GROUP):
        try:
            ep.load()
        except Exception as exc:
            logger.warning("Failed to load readout entry-point {}: {}", ep.name, exc)

    return _REGISTRY


def build_readout(name: str, dim: int, spec: ReadoutSpec):
    registry = discover()
    if name not in registry:
        raise ConfigError(
            f"unknown pooling method {name!r} (available: {', '.join(sorted(registry))})",
            field="pool",
        )
    module = registry[name]["factory"](dim, spec)
    logger.debug("Built readout {} with {} parameters", name, module.num_parameters())
    return module
