import random

import pytest

from dwbench.params import LowLevelParams, WorkloadParams
from dwbench.schema import generate_warehouse


def random_small_low(r: random.Random) -> LowLevelParams:
    """A small random low-level configuration (a few KB to a few hundred KB)."""
    tot = r.randint(2, 4)
    nb_ft = r.randint(1, 2)
    nb_dim = tuple(r.randint(1, tot) for _ in range(nb_ft))
    levels = tuple(r.randint(1, 3) for _ in range(tot))
    return LowLevelParams(
        NB_FT=nb_ft,
        NB_DIM=nb_dim,
        TOT_NB_DIM=tot,
        NB_MEAS=tuple(r.randint(1, 4) for _ in range(nb_ft)),
        DENSITY=tuple(round(r.uniform(0.05, 1), 3) for _ in range(nb_ft)),
        NB_LEVELS=levels,
        NB_ATT=tuple(tuple(r.randint(0, 3) for _ in range(n)) for n in levels),
        HHLEVEL_SIZE=tuple(r.randint(2, 6) for _ in range(tot)),
        DIM_SFACTOR=tuple(r.randint(1, 4) for _ in range(tot)),
    )


def uniform_low(nb_dims=3, levels=3, hh=2, sf=2, nb_att=2, nb_meas=2, density=0.2) -> LowLevelParams:
    return LowLevelParams(
        NB_FT=1,
        NB_DIM=(nb_dims,),
        TOT_NB_DIM=nb_dims,
        NB_MEAS=(nb_meas,),
        DENSITY=(density,),
        NB_LEVELS=(levels,) * nb_dims,
        NB_ATT=((nb_att,) * levels,) * nb_dims,
        HHLEVEL_SIZE=(hh,) * nb_dims,
        DIM_SFACTOR=(sf,) * nb_dims,
    )


@pytest.fixture(scope="session")
def small_warehouse():
    wh, _ = generate_warehouse(uniform_low(), 7)
    return wh


@pytest.fixture(scope="session")
def workload_params():
    return WorkloadParams(NB_Q=200)
