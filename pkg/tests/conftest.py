import shutil
import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anonnet.ingest import AccountProfile  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def make_profile(account_id="x", **kw) -> AccountProfile:
    base = dict(account_id=account_id, username="", screen_name="", description="", created_at=date(2012, 5, 1))
    base.update(kw)
    return AccountProfile(**base)


@pytest.fixture
def e2e_dir(tmp_path):
    dst = tmp_path / "e2e"
    shutil.copytree(FIXTURES / "e2e", dst)
    return dst
