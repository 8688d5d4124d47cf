from __future__ import annotations

import numpy as np
import pytest

from diffsim.kernels import KERNEL_IDS, build_rsm


def random_reps(rng: np.random.Generator, n: int, d: int | None = None) -> np.ndarray:
    d = d if d is not None else int(rng.integers(2, 17))
    return rng.standard_normal((n, d))


def random_rsm(rng: np.random.Generator, n: int, kernel: str | None = None) -> np.ndarray:
    kernel = kernel or KERNEL_IDS[int(rng.integers(0, len(KERNEL_IDS)))]
    return build_rsm(random_reps(rng, n), kernel).data


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xD1FF)
