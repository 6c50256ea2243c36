"""Kernel backend selection: compiled extension if present, numpy otherwise."""

try:
    from . import _kernels as kernels
except ImportError:  # pragma: no cover - depends on build environment
    from . import _kernels_py as kernels

KERNEL_BACKEND: str = kernels.BACKEND
