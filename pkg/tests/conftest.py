import numpy as np
import pytest

from morsegap import ReducedPSpinFamily, sweep
from morsegap.critical_points import CriticalPoint


def make_point(kind, s=0.5, lam=0.0, f_val=-1.0, K1=-1.0, K2=1.0,
               f_sl=0.0, level_index=None):
    """Synthetic critical point for unit tests of the per-point formulas."""
    index = {"minimum": 0, "saddle": 1, "maximum": 2}[kind]
    return CriticalPoint(s=s, lam=lam, f_val=f_val, f_ss=2 * K1, f_sl=f_sl,
                         f_ll=2 * K2, kind=kind, morse_index=index, K1=K1,
                         K2=K2, axis_rotation=0.0, gauss_K=4 * K1 * K2,
                         residual=0.0, level_index=level_index)


@pytest.fixture(scope="session")
def pspin_sweep_p5():
    fam = ReducedPSpinFamily(7, 5)
    grid = np.round(np.linspace(1.0, 0.0, 51), 10)
    return fam, sweep(fam, grid, grid_density=24)


@pytest.fixture(scope="session")
def pspin_sweep_p3():
    fam = ReducedPSpinFamily(7, 3)
    grid = np.round(np.linspace(1.0, 0.0, 51), 10)
    return fam, sweep(fam, grid, grid_density=24)
