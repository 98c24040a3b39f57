# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import pytest

import bduf.settings as settings


@pytest.fixture(autouse=True)
def _quiet(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, 'show_progress', False)
    monkeypatch.setattr(settings, 'cache_dir', str(tmp_path / "cache"))
    yield
