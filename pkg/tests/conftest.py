import dataclasses

import pytest

from hystlab import (
    NMOS_DEFAULT,
    PMOS_DEFAULT,
    ComparatorConfig,
    ComparatorVariant,
    build_comparator,
)


@pytest.fixture(scope="session")
def zero_lambda_models():
    # lam=0 makes the square law exactly invertible, which the
    # closed-form cross-checks rely on
    return (dataclasses.replace(NMOS_DEFAULT, lam=0.0),
            dataclasses.replace(PMOS_DEFAULT, lam=0.0))


@pytest.fixture(scope="session")
def hysteresis_net(zero_lambda_models):
    nm, pm = zero_lambda_models
    return build_comparator(ComparatorConfig(
        variant=ComparatorVariant.HYSTERESIS, nmos=nm, pmos=pm))
