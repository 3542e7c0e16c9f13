import doctest

import pytest

import dbel.calibration
import dbel.dbel
import dbel.directions
import dbel.power


@pytest.mark.parametrize("module", [dbel.calibration, dbel.dbel, dbel.directions, dbel.power],
                         ids=lambda m: m.__name__)
def test_docstring_examples(module):
    result = doctest.testmod(module)
    assert result.attempted > 0 and result.failed == 0
