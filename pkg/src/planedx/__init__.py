"""Plane localization and anomaly diagnosis on 3D phantom volumes.

Two-stage pipeline: a conditional denoising diffusion model regresses the
standard plane of a volume in tangent-point coordinates, then an RL agent
summarizes the denoising trajectory into key slices for classification,
optionally adjusted by a text-condition uncertainty score.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
