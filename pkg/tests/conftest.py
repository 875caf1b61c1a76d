from fractions import Fraction

import pytest

from harmonic_stretch import Config


@pytest.fixture
def cfg_f2_eta2() -> Config:
    return Config(f=2, eta=Fraction(2))


@pytest.fixture
def cfg_f1_eta2() -> Config:
    return Config(f=1, eta=Fraction(2))


@pytest.fixture
def cfg_f3_eta2() -> Config:
    return Config(f=3, eta=Fraction(2))


@pytest.fixture
def cfg_f3_eta3() -> Config:
    return Config(f=3, eta=Fraction(3))


def fig1b_document() -> dict:
    """Hand-encoded invalid packing of sizes (0.4, 0.6, 0.3, 0.2) at
    f=2, eta=2: killing bins 1 and 2 leaves no feasible promotion split."""
    return {
        "config": {"f": 2, "eta": "2/1"},
        "bins": [
            {"id": 1, "contents": [
                {"item": 0, "role": "primary", "size": "2/5"},
                {"item": 2, "role": "primary", "size": "3/10"},
                {"item": 3, "role": "primary", "size": "1/5"}]},
            {"id": 2, "contents": [
                {"item": 1, "role": "primary", "size": "3/5"},
                {"item": 3, "role": "standby", "size": "1/10"}]},
            {"id": 3, "contents": [
                {"item": 0, "role": "standby", "size": "1/5"},
                {"item": 2, "role": "standby", "size": "3/20"},
                {"item": 1, "role": "standby", "size": "3/10"},
                {"item": 3, "role": "standby", "size": "1/10"}]},
            {"id": 4, "contents": [
                {"item": 0, "role": "standby", "size": "1/5"},
                {"item": 1, "role": "standby", "size": "3/10"},
                {"item": 2, "role": "standby", "size": "3/20"}]},
        ],
    }


FIG1_SIZES = [Fraction(2, 5), Fraction(3, 5), Fraction(3, 10), Fraction(1, 5)]
