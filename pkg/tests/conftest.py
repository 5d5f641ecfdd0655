from pathlib import Path

import numpy as np
import pytest

from fuzzycf.dataset import RatingScale, RatingsMatrix

ROOT = Path(__file__).resolve().parents[1]
ML100K = ROOT / "data" / "u.data"


def make_matrix(rows, n_users=None, n_items=None, scale=RatingScale()):
    """RatingsMatrix from ``{user: {item: rating}}`` with identity id maps."""
    n_users = n_users if n_users is not None else max(rows) + 1
    n_items = n_items if n_items is not None else max(i for r in rows.values() for i in r) + 1
    triples = [(u, i, r) for u, row in sorted(rows.items()) for i, r in sorted(row.items())]
    users, items, ratings = zip(*triples) if triples else ((), (), ())
    return RatingsMatrix(users, items, ratings, np.arange(n_users), np.arange(n_items), scale)


@pytest.fixture
def toy():
    # 5 users x 6 items
    return {
        0: {0: 5, 1: 3, 2: 4, 4: 1},
        1: {0: 4, 1: 2, 3: 5, 4: 2, 5: 3},
        2: {1: 5, 2: 5, 3: 1},
        3: {0: 1, 2: 2, 3: 4, 5: 5},
        4: {0: 3, 1: 3, 2: 3, 3: 3, 4: 3, 5: 3},
    }


@pytest.fixture(scope="session")
def ml100k_path():
    if not ML100K.exists():
        pytest.skip("MovieLens-100k not found at data/u.data (run scripts/fetch_ml100k.py)")
    return ML100K


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    def _record(criterion: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[criterion] = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
