import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lostnet.network.model import build_network, init_weights
from lostnet.train.loop import TrainConfig, train
from lostnet.train.synthetic import generate_corpus

# miniature schedule used by the training and service round-trip tests
OVERFIT_RESOLUTION = 64
OVERFIT_SEED = 3
OVERFIT_CONFIG = dict(
    freeze_epochs=5,
    freeze_batch=8,
    unfreeze_epochs=40,
    unfreeze_batch=16,
    init_lr=3e-3,
    freeze_lr_scale=0.1,
    momentum=0.9,
    optimizer="sgd",
    seed=OVERFIT_SEED,
)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Seeded synthetic 10-family corpus, 8 images per class."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = generate_corpus(root, per_class=8, size=128, seed=11)
    return manifest


@pytest.fixture(scope="session")
def overfit_model(corpus):
    """Weights trained to convergence on the synthetic corpus (trains once)."""
    spec = build_network(10, input_resolution=OVERFIT_RESOLUTION)
    store = init_weights(spec, seed=OVERFIT_SEED)
    config = TrainConfig(**OVERFIT_CONFIG)
    store, history = train(spec, store, corpus, corpus, config)
    return {
        "spec": spec,
        "store": store,
        "history": history,
        "manifest": corpus,
        "config": config,
    }


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in str(getattr(report, "nodeid", "")):
                name = report.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
