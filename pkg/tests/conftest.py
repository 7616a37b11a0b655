import json

import pytest

from dpcount.cli import data_path
from dpcount.delpezzo import DelPezzoModel
from dpcount.globalfield import Rationals, FunctionField


def load(name):
    with data_path(name).open() as f:
        return DelPezzoModel.from_json(json.load(f))


@pytest.fixture(scope="session")
def QQ():
    return Rationals()


@pytest.fixture(scope="session")
def F3t():
    return FunctionField(3)


@pytest.fixture(scope="session")
def baselines():
    with data_path("baselines.json").open() as f:
        return json.load(f)


@pytest.fixture(scope="session")
def fermat3():
    return load("fermat3.json")


@pytest.fixture(scope="session")
def dp5_diagonal():
    return load("dp5_diagonal.json")


@pytest.fixture(scope="session")
def dp5_diagonal_f3():
    return load("dp5_diagonal_f3.json")


@pytest.fixture(scope="session")
def dp4_normal():
    return load("dp4_normal.json")


@pytest.fixture(scope="session")
def dp1_sample():
    return load("dp1_sample.json")


@pytest.fixture(scope="session")
def dp2_fermat4():
    return DelPezzoModel.from_json({
        "field": {"field": "Q"}, "variant": "DP2", "model_id": "dp2_fermat4",
        "coeffs": {"g": {"4,0,0": 1, "0,4,0": 1, "0,0,4": 1}}})


@pytest.fixture(scope="session")
def dp4_f3():
    return DelPezzoModel.from_json({
        "field": {"field": "Fq(t)", "q": 3}, "variant": "DP4",
        "model_id": "dp4_f3",
        "coeffs": {"Q1": {"1,1,0,0,0": [1], "0,0,1,1,0": [2]},
                   "Q2": {"2,0,0,0,0": [1], "0,2,0,0,0": [1],
                          "0,0,2,0,0": [2], "0,0,0,2,0": [1],
                          "0,0,0,0,2": [1]}}})
