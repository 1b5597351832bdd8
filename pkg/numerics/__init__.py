from .tensor import NdArray, Tape, apply_op, backward, parameter, set_debug, active_tape
from .rng import SeededRng
from .gradcheck import grad_check, grad_check_detail
from . import ops

__all__ = [
    "NdArray",
    "Tape",
    "apply_op",
    "backward",
    "parameter",
    "set_debug",
    "active_tape",
    "SeededRng",
    "grad_check",
    "grad_check_detail",
    "ops",
]
