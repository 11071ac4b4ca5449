"""Performance analysis of underwater optical links assisted by optical RIS."""
from .metrics import (DetectionMode, DirectParams, ModulationSpec, OrisParams, ber, capacity, cdf,
                      diversity_order, op_direct, op_mrc, op_oris, op_sc, soc)
from .specfun import G, meijer_g, meijer_g_eval

__all__ = [
    "DetectionMode", "DirectParams", "ModulationSpec", "OrisParams", "ber", "capacity", "cdf",
    "diversity_order", "op_direct", "op_mrc", "op_oris", "op_sc", "soc", "G", "meijer_g", "meijer_g_eval",
]
__version__ = "0.1.0"
