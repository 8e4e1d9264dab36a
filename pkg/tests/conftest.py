import numpy as np
import pytest

from curvedyn import CTX_C, CTX_R, desboves_map
from curvedyn.fermat import fermat_curve_model

REF_PARAMS = (-5 / 9, 1 / 9, 7 / 9)  # two-thirds family at b = 1/9


@pytest.fixture(scope="session")
def ref_map():
    return desboves_map(REF_PARAMS)


@pytest.fixture(scope="session")
def curve_c():
    return fermat_curve_model(CTX_C, -2)


@pytest.fixture(scope="session")
def curve_r():
    return fermat_curve_model(CTX_R, -2)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
