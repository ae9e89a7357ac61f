import pytest

from mg1bayes.marks import parse_marks


# The nine length-9 reference strings used across the combinatorial tests.
EXAMPLE_STRINGS = {
    "a": parse_marks("121211100"),
    "b": parse_marks("102232101"),
    "c": parse_marks("123332100"),
    "d": parse_marks("100234543"),
    "e": parse_marks("121002343"),
    "f": parse_marks("102102323"),
    "g": parse_marks("100234543"),
    "h": parse_marks("100002345"),
    "i": parse_marks("210101100"),
}


@pytest.fixture
def examples():
    return EXAMPLE_STRINGS
