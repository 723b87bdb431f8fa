"""
This is a configuration file for pytest containing customizations and fixtures.

Tests whose node id contains ``_slow_`` run full-size synthetic benchmarks and
are marked ``slow``; deselect them with ``-m "not slow"``.
"""

from __future__ import annotations

import numpy as np
import pytest
from _pytest.nodes import Item

from mvtpmsvm.data.dataset import TwoViewDataset
from mvtpmsvm.kernel.gram import KernelSpec
from mvtpmsvm.model.dual import Hyperparams, ViewSplit


def pytest_collection_modifyitems(items: list[Item]):
    for item in items:
        if "_slow_" in item.nodeid:
            item.add_marker(pytest.mark.slow)


def random_dataset(seed: int, m1: int = 8, m2: int = 7, d_a: int = 3, d_b: int = 2, shift: float = 1.0):
    """Two overlapping Gaussian classes seen through two random views."""
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.ones(m1, dtype=int), -np.ones(m2, dtype=int)])
    centers = np.where(labels == 1, shift, -shift)[:, None]
    view_a = rng.normal(size=(m1 + m2, d_a)) + centers
    view_b = rng.normal(size=(m1 + m2, d_b)) + 0.5 * centers
    return TwoViewDataset(view_a=view_a, view_b=view_b, labels=labels, name=f"random{seed}")


def random_split(seed: int, m1: int = 6, m2: int = 5, d: int = 3) -> ViewSplit:
    return ViewSplit.from_dataset(random_dataset(seed, m1, m2, d, d))


@pytest.fixture
def blobs() -> TwoViewDataset:
    """Two far-separated blobs, identical in both views."""
    rng = np.random.default_rng(3)
    positive = rng.normal(size=(15, 2)) * 0.3 + np.array([3.0, 3.0])
    negative = rng.normal(size=(15, 2)) * 0.3 - np.array([3.0, 3.0])
    points = np.vstack([positive, negative])
    labels = np.concatenate([np.ones(15, dtype=int), -np.ones(15, dtype=int)])
    return TwoViewDataset(view_a=points, view_b=points.copy(), labels=labels, name="blobs",
                          label_names={1: "pos", -1: "neg"})


@pytest.fixture
def unit_hyperparams() -> Hyperparams:
    kernel = KernelSpec("gaussian-paper", 1.0)
    return Hyperparams(kernel_a=kernel, kernel_b=kernel)


@pytest.fixture
def linear_hyperparams() -> Hyperparams:
    kernel = KernelSpec("linear")
    return Hyperparams(C1=0.5, C2=2.0, C3=0.7, C4=1.5, D1=1.0, D2=0.8, eps1=0.1, eps2=0.2,
                       kernel_a=kernel, kernel_b=kernel)
