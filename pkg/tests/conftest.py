import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bddlearn.data import dataset_from_bits

# 8 examples over 4 binary features; depth 2 suffices for a perfect
# classifier (ordering [f1, f2], table 1000) but depth 1 does not.
DEMO8_ROWS = [
    (1, 0, 1, 0),
    (1, 0, 0, 1),
    (0, 0, 1, 0),
    (1, 1, 0, 0),
    (0, 0, 0, 1),
    (1, 1, 1, 1),
    (0, 1, 1, 0),
    (0, 0, 1, 1),
]
DEMO8_LABELS = [0, 0, 1, 0, 1, 0, 0, 1]


@pytest.fixture
def demo8():
    return dataset_from_bits(DEMO8_ROWS, DEMO8_LABELS)


def demo8_csv_text() -> str:
    lines = ["f1,f2,f3,f4,label"]
    for row, label in zip(DEMO8_ROWS, DEMO8_LABELS):
        lines.append(",".join(map(str, row)) + f",{label}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def demo8_csv(tmp_path):
    path = tmp_path / "demo8.csv"
    path.write_text(demo8_csv_text())
    return path
