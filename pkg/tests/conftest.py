import os

import pytest

import singpencil as sp

#: reproduction mode runs the paper-scale trial counts (minutes); the default
#: CI mode keeps everything at desk scale (seconds)
REPRO = os.environ.get("SINGPENCIL_REPRO", "") == "1"


def trial_count(ci: int, repro: int) -> int:
    return repro if REPRO else ci


@pytest.fixture(scope="session")
def corpus():
    return sp.corpus()


@pytest.fixture(scope="session")
def hmp():
    return sp.paper_pencil("hmp8x8")


@pytest.fixture(scope="session")
def delta25():
    return sp.paper_pencil("delta25")


@pytest.fixture(scope="session")
def blockdiag10():
    return sp.paper_pencil("blockdiag10")
