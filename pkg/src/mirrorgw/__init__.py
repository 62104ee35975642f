"""Open-closed Gromov-Witten potentials of affine toric Calabi-Yau
3-orbifolds, computed along two independent routes (decorated graph sums
and spectral-curve recursion) and compared coefficient by coefficient.
"""

from .orbifold import OrbifoldInput, OrbifoldData, build_orbifold

__all__ = ["OrbifoldInput", "OrbifoldData", "build_orbifold"]

__version__ = "0.1.0"
