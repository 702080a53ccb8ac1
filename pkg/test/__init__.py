import pytest

pytest.register_assert_rewrite("test.oracles")
pytest.register_assert_rewrite("test.testdoubles.ui")
