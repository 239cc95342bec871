import json
import os

import pytest

from shiftforge.cli import DATA_DIR
from shiftforge.core.sft import sft_from_json
from shiftforge.sofic.presentation import SoficPresentation
from shiftforge.tiling.periodic import PeriodicTiling


def _data(name):
    with open(os.path.join(DATA_DIR, name), encoding='utf-8') as fh:
        return json.load(fh)


@pytest.fixture(scope='session')
def golden():
    return sft_from_json(_data('golden.json'))


@pytest.fixture(scope='session')
def full2():
    return sft_from_json(_data('full2.json'))


@pytest.fixture(scope='session')
def hard_square():
    return sft_from_json(_data('hard_square.json'))


@pytest.fixture(scope='session')
def even():
    return SoficPresentation.from_json(_data('even.json'))


@pytest.fixture(scope='session')
def box2():
    return PeriodicTiling.from_json(_data('box2.json'))


@pytest.fixture(scope='session')
def dominoes():
    return PeriodicTiling.from_json(_data('dominoes.json'))
