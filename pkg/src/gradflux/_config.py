import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def defaults():
    """Shipped defaults (design coefficients, flux quantum, tolerances)."""
    text = resources.files("gradflux").joinpath("defaults.json").read_text(encoding="utf-8")
    return json.loads(text)


PHI0 = defaults()["phi0_wb"]
# 1 µm² × 1 µT in Wb
UM2_UT = 1e-18
