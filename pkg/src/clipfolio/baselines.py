"""Static allocation baselines, split equally within each asset class."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from .errors import EmptyUniverse, MissingClass

BOND_CLASSES = ("bond_intermediate", "bond_long")

# widely published risk-balanced allocation; the class weights are configuration
ALL_WEATHER = {
    "equity": 0.30,
    "bond_long": 0.40,
    "bond_intermediate": 0.15,
    "gold": 0.075,
    "commodity": 0.075,
}
SIXTY_FORTY = {"equity": 0.6, "bond": 0.4}


def equal_weight(assets: Sequence) -> np.ndarray:
    n = len(assets)
    if n == 0:
        raise EmptyUniverse("no assets")
    return np.full(n, 1.0 / n)


def class_allocation(classes: Sequence[str], targets: Mapping[str, float]) -> np.ndarray:
    """Spread each class target equally over that class's assets.

    A target key may name a single class or ``"bond"`` for both bond classes.
    """
    classes = list(classes)
    if not classes:
        raise EmptyUniverse("no assets")
    w = np.zeros(len(classes))
    for key, frac in targets.items():
        members = BOND_CLASSES if key == "bond" else (key,)
        idx = [i for i, c in enumerate(classes) if c in members]
        if not idx:
            raise MissingClass(f"universe has no {key} asset")
        w[idx] = frac / len(idx)
    return w


def sixty_forty(classes: Sequence[str]) -> np.ndarray:
    return class_allocation(classes, SIXTY_FORTY)


def all_weather(classes: Sequence[str], allocation: Mapping[str, float] = ALL_WEATHER) -> np.ndarray:
    return class_allocation(classes, allocation)
