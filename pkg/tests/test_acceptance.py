"""One PASS/FAIL line per acceptance criterion, printed even without -s."""
import pytest

from vcsequent import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CHECKS))
def test_criterion(number, capsys):
    res = acceptance.run(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
