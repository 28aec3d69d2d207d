"""fovea: typed tensors, image kernels, codecs, 3D geometry, and ICP."""

from . import errors
from .tensor import CountingAllocator, CpuAllocator, Tensor, TensorView

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CpuAllocator",
    "CountingAllocator",
    "Tensor",
    "TensorView",
    "__version__",
]
