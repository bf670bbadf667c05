import logging

import pytest

import commgossip as lib

def test_timeit(caplog):
    with caplog.at_level(logging.INFO, logger='commgossip.timeit'):
        with lib.timeit.timeit('exact recursion') as timer:
            pass
    assert timer.time >= 0
    assert 'Time in stage exact recursion' in caplog.text

def test_timeit_aborted(caplog):
    with caplog.at_level(logging.INFO, logger='commgossip.timeit'):
        with pytest.raises(KeyError):
            with lib.timeit.timeit('sign check'):
                raise KeyError(3)
    assert 'aborted with KeyError' in caplog.text
