import pytest

from lexilab.demo import build_demo_data


@pytest.fixture(scope="session")
def tiny_demo(tmp_path_factory):
    """A miniature corpus + lexicon for fast end-to-end tests."""
    out = tmp_path_factory.mktemp("tiny-demo")
    return build_demo_data(out, n_words=4000, seed=7)
