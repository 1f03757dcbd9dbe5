import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scene_labeller.pipeline import cmd_train  # noqa: E402
from scene_labeller.synthetic import generate_dataset  # noqa: E402

SYNTH_IMAGES = 60
SYNTH_TRAIN = 40


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synthetic_root(tmp_path_factory):
    return generate_dataset(tmp_path_factory.mktemp("synthetic"), SYNTH_IMAGES, seed=0)


@pytest.fixture(scope="session")
def synthetic_model(synthetic_root, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.txt"
    model = cmd_train(synthetic_root, model_path=path, seed=0, train_count=SYNTH_TRAIN, echo=None)
    return path, model


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    entry = _criteria.setdefault(number, {"text": text, "status": "PASS", "measured": ""})
    if call.excinfo is not None:
        entry["status"] = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
    for key, value in item.user_properties:
        if key == "measured":
            entry["measured"] = value


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        line = f"criterion {number}: {entry['status']}  {entry['text']}"
        if entry["measured"]:
            line += f"  [{entry['measured']}]"
        terminalreporter.write_line(line)
