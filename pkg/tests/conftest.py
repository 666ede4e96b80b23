"""Shared run cache so expensive evolutions are computed once per session."""

import numpy as np
import pytest

from ewkg.core import InitialDataFamily, SimConfig
from ewkg.cauchy import run_cauchy
from ewkg.nullev import run_null

_CACHE = {}


def make_config(**kwargs):
    family_keys = ("kind", "amp_phi", "amp_gamma", "center", "width",
                   "amp_phi_t", "amp_gamma_t")
    fam = {k: kwargs.pop(k) for k in family_keys if k in kwargs}
    if fam:
        kwargs["data_family"] = InitialDataFamily(**fam)
    return SimConfig(**kwargs)


@pytest.fixture(scope="session")
def cauchy():
    def factory(**kwargs):
        key = ("cauchy", tuple(sorted(kwargs.items())))
        if key not in _CACHE:
            _CACHE[key] = run_cauchy(make_config(**kwargs), collect_residuals=False)
        return _CACHE[key]

    return factory


@pytest.fixture(scope="session")
def nullrun():
    def factory(v_max=None, **kwargs):
        key = ("null", v_max, tuple(sorted(kwargs.items())))
        if key not in _CACHE:
            _CACHE[key] = run_null(make_config(**kwargs), v_max=v_max)
        return _CACHE[key]

    return factory


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
