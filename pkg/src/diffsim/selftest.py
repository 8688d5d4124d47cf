"""Quick invariant battery over random instances, runnable from the CLI.

Each check draws seeded random inputs, asserts the library's core algebraic
invariants, and reports pass/fail.  This is a smoke screen for installs, not
a replacement for the test suite.
"""

from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Callable

import numpy as np

from .centering import ProbVector, center_uniform, center_weighted, uniform_prob
from .kernels import KERNEL_IDS, build_rsm
from .markov import ad_fuse, alpha, markov_embed, matrix_power
from .matrixio import read_array, write_matrix
from .measures import (
    ad_cka,
    ad_distcorr,
    cka,
    cka_via_markov,
    distcorr,
    distcorr_via_markov,
    ms_cka,
    ms_distcorr,
)
from .evaluation import kendall_tau, spearman


def _random_rsm(rng: np.random.Generator, n: int, kernel: str) -> np.ndarray:
    reps = rng.standard_normal((n, max(2, n // 2)))
    return build_rsm(reps, kernel).data


def _check_centering(rng: np.random.Generator) -> None:
    for _ in range(50):
        n = int(rng.integers(2, 24))
        m = rng.standard_normal((n, n)) * rng.uniform(0.1, 50)
        q = rng.uniform(0.2, 2.0, size=n)
        q = ProbVector(q / q.sum())
        tol = 1e-10 * (1.0 + float(np.linalg.norm(m)))
        c = center_weighted(m, q)
        assert np.abs(center_weighted(c, q) - c).max() <= tol, "centering not idempotent"
        assert np.abs(c.sum(axis=1)).max() <= tol, "row sums not annihilated"
        assert np.abs(center_weighted(np.outer(np.ones(n), q.q), q)).max() <= tol
        cu = center_uniform(m)
        assert np.abs(center_weighted(m, uniform_prob(n)) - cu).max() <= tol


def _check_embedding(rng: np.random.Generator) -> None:
    for _ in range(50):
        n = int(rng.integers(3, 24))
        kernel = KERNEL_IDS[int(rng.integers(0, 3))]
        s = _random_rsm(rng, n, kernel)
        p = markov_embed(s)
        assert p.data.min() >= -1e-12
        assert np.abs(p.data.sum(axis=1) - 1.0).max() <= 1e-9
        assert p.data.max() <= 2.0 / n + 1e-12
        lhs = center_uniform(p.data)
        rhs = alpha(s) * center_uniform(s)
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(np.abs(rhs).max(), 1e-30)
        a = center_uniform(s)
        closed = 1.0 / (n * np.abs(a).max())
        assert abs(alpha(s) - closed) <= 1e-12 * closed


def _check_measure_equivalence(rng: np.random.Generator) -> None:
    for _ in range(20):
        n = int(rng.integers(4, 32))
        s1 = _random_rsm(rng, n, "linear")
        s2 = _random_rsm(rng, n, "rbf")
        assert abs(cka_via_markov(s1, s2).value - cka(s1, s2).value) <= 1e-10
        assert abs(distcorr_via_markov(s1, s2).value - distcorr(s1, s2).value) <= 1e-10
        assert abs(ms_cka(s1, s2, 1).value - cka(s1, s2).value) <= 1e-10
        assert abs(ms_distcorr(s1, s2, 1).value - distcorr(s1, s2).value) <= 1e-10


def _check_fusion(rng: np.random.Generator) -> None:
    n = 12
    ps = [markov_embed(_random_rsm(rng, n, "linear")) for _ in range(4)]
    assert np.array_equal(ad_fuse([ps[0]]).data, ps[0].data)
    left = ad_fuse(ps).data
    right = ad_fuse(ps[2:]).data @ ad_fuse(ps[:2]).data
    assert np.abs(left - right).max() <= 1e-12 * max(np.abs(left).max(), 1e-30)
    p = ps[0]
    ab = matrix_power(p, 5).data
    a_b = matrix_power(p, 2).data @ matrix_power(p, 3).data
    assert np.abs(ab - a_b).max() <= 1e-10


def _check_ad_singleton(rng: np.random.Generator) -> None:
    r1 = rng.standard_normal((10, 4))
    r2 = rng.standard_normal((10, 6))
    got = ad_cka([r1], [r2], kernel="linear").value
    want = cka(build_rsm(r1, "linear"), build_rsm(r2, "linear")).value
    assert abs(got - want) <= 1e-10
    got = ad_distcorr([r1], [r2]).value
    want = distcorr(build_rsm(r1, "euclidean_distance"), build_rsm(r2, "euclidean_distance")).value
    assert abs(got - want) <= 1e-10


def _check_roundtrip(rng: np.random.Generator) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(10):
            m = rng.standard_normal((int(rng.integers(2, 9)), int(rng.integers(1, 9))))
            path = Path(tmp) / f"m{i}.rsm"
            write_matrix(m, path)
            back = read_array(path)
            assert back.shape == m.shape and np.array_equal(back, m)


def _check_rank_correlation(rng: np.random.Generator) -> None:
    assert spearman([1, 2, 3], [10, 20, 30]) == 1.0
    assert spearman([1, 2, 3], [3, 2, 1]) == -1.0
    assert abs(spearman([1, 2, 3, 4], [2, 1, 4, 3]) - 0.6) <= 1e-15
    assert kendall_tau([1, 2, 3, 4], [2, 1, 4, 3]) == (4 - 2) / 6
    xs = list(rng.integers(0, 5, size=20))
    assert abs(kendall_tau(xs, xs) - 1.0) <= 1e-15


CHECKS: tuple[tuple[str, Callable[[np.random.Generator], None]], ...] = (
    ("centering_operators", _check_centering),
    ("markov_embedding", _check_embedding),
    ("measure_equivalence", _check_measure_equivalence),
    ("fusion_and_powers", _check_fusion),
    ("ad_singleton_reduction", _check_ad_singleton),
    ("matrix_file_roundtrip", _check_roundtrip),
    ("rank_correlation", _check_rank_correlation),
)


def run_selftest(seed: int = 1337) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            fn(np.random.default_rng(seed))
            print(f"selftest.{name}: pass")
        except AssertionError as exc:
            ok = False
            print(f"selftest.{name}: FAIL ({exc})")
    return ok
