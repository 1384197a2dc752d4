from pathlib import Path

import pytest

from mechgen.evaluate import load_challenge
from mechgen.game import build_game_registry, build_hook_table, on_tile_tapped_signature
from mechgen.lang import parse

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def game_registry():
    return build_game_registry()


@pytest.fixture(scope="session")
def tap_sig():
    return on_tile_tapped_signature()


@pytest.fixture()
def hooks():
    return build_hook_table()


@pytest.fixture(scope="session")
def unsolvable_challenge():
    return load_challenge(FIXTURES / "unsolvable.ch")


@pytest.fixture(scope="session")
def clearable_challenge():
    return load_challenge(FIXTURES / "clearable.ch")


@pytest.fixture(scope="session")
def set_yellow_block():
    return parse("SetTile(x, y, Colour.Y);", params=["x", "y"])
