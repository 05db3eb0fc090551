from __future__ import annotations

import numpy as np
import pytest

from binnet.engine import BinaryMatrix

TOY_LABELS = ["Software Dev", "Big Data", "C++", "Tech Meetup", "Web Design", "Poker", "Musician", "Jazz"]
TOY_DENSE = np.array(
    [
        [1, 1, 1, 0, 0, 1, 0, 0],
        [1, 0, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 1, 1, 0],
        [0, 0, 0, 0, 0, 1, 1, 1],
    ],
    dtype=bool,
)
TOY_MEMBERSHIPS = {
    "A": ["Software Dev", "Big Data", "C++", "Poker"],
    "B": ["Tech Meetup", "C++", "Software Dev"],
    "C": ["Web Design", "Poker", "Musician"],
    "D": ["Poker", "Musician", "Jazz"],
}


@pytest.fixture
def toy() -> BinaryMatrix:
    return BinaryMatrix.from_dense(TOY_DENSE, TOY_LABELS)


@pytest.fixture
def toy_pairs_csv(tmp_path):
    path = tmp_path / "toy_pairs.csv"
    lines = ["member_id,group_id"]
    for member, groups in TOY_MEMBERSHIPS.items():
        lines += [f"{member},{g}" for g in groups]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def random_tables(rng: np.random.Generator, n: int) -> np.ndarray:
    """n random 2x2 tables as rows (p00, p01, p10, p11), uniform on the simplex."""
    return rng.dirichlet(np.ones(4), size=n)


# -- acceptance report ----------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
