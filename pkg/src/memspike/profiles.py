"""Named device parameter profiles shipped with the package."""

from functools import lru_cache
from importlib import resources
import json

from ._validation import InvalidInputError
from .adder import OrderCells
from .device import SEED_PARAMS, DeviceParams

__all__ = ["get_profile", "profile_names", "get_order_cells", "AND_CURRENT_SCALE"]

# the AND data sit at the µA scale, the adder at nA
AND_CURRENT_SCALE = 40.0

_BUILTIN = {
    "seed": SEED_PARAMS,
    "and-seed": SEED_PARAMS.scaled(AND_CURRENT_SCALE),
}


@lru_cache(maxsize=None)
def _data():
    text = resources.files("memspike").joinpath("data/profiles.json").read_text()
    return json.loads(text)


def profile_names():
    return sorted(set(_BUILTIN) | set(_data()["profiles"]))


def get_profile(name):
    if name in _BUILTIN:
        return _BUILTIN[name]
    try:
        entry = _data()["profiles"][name]
    except KeyError:
        raise InvalidInputError(
            f"unknown profile {name!r}; available: {', '.join(profile_names())}"
        ) from None
    return DeviceParams.from_dict(entry)


def get_order_cells():
    cells = _data().get("order_cells")
    return None if cells is None else OrderCells.from_dict(cells)
