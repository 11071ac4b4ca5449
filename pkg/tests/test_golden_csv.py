from pathlib import Path

import pytest

from uwoc import cli
from uwoc.config import FIGURES

GOLDEN = Path(__file__).parent / "golden"


def test_every_figure_has_golden():
    for fig in FIGURES:
        assert (GOLDEN / f"{fig}.csv").is_file(), fig


@pytest.mark.parametrize("fig", FIGURES)
def test_figure_matches_golden(fig, tmp_path):
    out = tmp_path / f"{fig}.csv"
    assert cli.main(["sweep", str(GOLDEN / f"{fig}.json"), "--out", str(out), "--threads", "2"]) == cli.EXIT_OK
    assert out.read_bytes() == (GOLDEN / f"{fig}.csv").read_bytes()
