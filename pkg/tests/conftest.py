import functools

import numpy as np
import pytest

from qinduce.specfile import parse_spec
from qinduce.suites import CATALOG, build_from_spec, catalog_spec


@functools.lru_cache(maxsize=None)
def built_preset(name: str):
    return build_from_spec(catalog_spec(name))


@functools.lru_cache(maxsize=None)
def corep_of_preset(name: str):
    from qinduce.induction import build_lambda_rho, carrier_space, solve_P

    built = built_preset(name)
    ps = solve_P(built.bundle, built.U, built.lay_NK, built.K_dim)
    carrier = carrier_space(built.bundle, ps)
    return built, build_lambda_rho(built.bundle, built.U, built.lay_NK,
                                   built.K_dim, carrier=carrier)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2026)


@pytest.fixture(scope="session")
def s3_c3():
    return built_preset("s3_mod_c3_omega")


@pytest.fixture(scope="session")
def s3_c3_corep():
    return corep_of_preset("s3_mod_c3_omega")


@pytest.fixture(scope="session")
def catalog_names():
    return list(CATALOG)
