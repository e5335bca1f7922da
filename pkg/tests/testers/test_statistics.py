"""Test the M and N statistics and the median-of-means estimator."""

import math

import numpy as np
import pytest
import torch


def test_statistic_M_examples():

    from convex_truncation.gauss.batch import SampleBatch
    from convex_truncation.testers.statistics import statistic_M, statistic_N

    zeros = SampleBatch(data=torch.zeros(10, 4, dtype=torch.float64))
    assert statistic_M(zeros) == 0.0
    assert statistic_N(zeros) == 0.0

    ones = torch.zeros(7, 4, dtype=torch.float64)
    ones[:, 0] = 1.0
    batch = SampleBatch(data=ones)
    assert statistic_M(batch) == 1.0
    assert statistic_N(batch) == 1.0

    # mean of (1, 0) and (-1, 0) is the origin
    pm = SampleBatch(data=[[1.0, 0.0], [-1.0, 0.0]])
    assert statistic_M(pm) == 1.0
    assert statistic_N(pm) == 0.0


def test_statistic_M_null_law(rng):

    from convex_truncation.gauss.primitives import gaussian_batch
    from convex_truncation.testers.statistics import statistic_M
    from convex_truncation.utils.parallel import map_trials

    n, T, trials = 100, 5000, 2000
    values = np.array(
        map_trials(lambda i, s: statistic_M(gaussian_batch(n, T, s)), trials, rng, workers=4)
    )
    assert abs(values.mean() - n) < 0.03
    # Var[M] = 2n / T
    assert abs(values.var(ddof=1) / (2.0 * n / T) - 1.0) < 0.25


def test_num_blocks():

    from convex_truncation.testers.statistics import num_blocks

    assert num_blocks(0.01) == 37
    assert num_blocks(0.5) == 6
    with pytest.raises(ValueError):
        num_blocks(1.0)


def test_geometric_median():

    from convex_truncation.errors import TooFewSamples
    from convex_truncation.testers.statistics import geometric_median

    square = torch.tensor([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]], dtype=torch.float64)
    assert torch.allclose(geometric_median(square), torch.zeros(2, dtype=torch.float64), atol=1e-12)

    same = torch.tensor([[2.0, 3.0]] * 5, dtype=torch.float64)
    assert torch.equal(geometric_median(same), same[0])

    # one far outlier barely moves the median
    cluster = torch.tensor(
        [[0.1, 0.0], [-0.1, 0.0], [0.0, 0.1], [0.0, -0.1], [0.05, 0.05], [1000.0, 1000.0]],
        dtype=torch.float64,
    )
    assert float(torch.linalg.norm(geometric_median(cluster))) < 1.0
    assert float(torch.linalg.norm(cluster.mean(dim=0))) > 100.0

    with pytest.raises(TooFewSamples):
        geometric_median(torch.zeros(0, 2, dtype=torch.float64))


def test_mean_estimator_identical_rows():

    from convex_truncation.gauss.batch import SampleBatch
    from convex_truncation.testers.statistics import mean_estimator

    x = torch.tensor([0.3, -1.2, 4.0], dtype=torch.float64)
    batch = SampleBatch(data=x.repeat(50, 1))
    assert torch.equal(mean_estimator(batch, 0.01), x)


def test_mean_estimator_too_few_samples(rng):

    from convex_truncation.errors import TooFewSamples
    from convex_truncation.gauss.primitives import gaussian_batch
    from convex_truncation.testers.statistics import mean_estimator

    # delta = 0.01: k = 37 blocks and 8 ceil(log 100) = 40 rows
    with pytest.raises(TooFewSamples):
        mean_estimator(gaussian_batch(3, 39, rng), 0.01)
    assert mean_estimator(gaussian_batch(3, 40, rng), 0.01).shape == (3,)


def test_mean_estimator_null(rng):

    from convex_truncation.gauss.primitives import gaussian_batch
    from convex_truncation.testers.statistics import statistic_L_normsq
    from convex_truncation.utils.parallel import map_trials

    values = map_trials(
        lambda i, s: statistic_L_normsq(gaussian_batch(50, 5000, s), 0.01), 100, rng, workers=4
    )
    assert sum(v <= 0.05 for v in values) >= 99


def test_mean_estimator_halfspace(rng):

    from convex_truncation.bodies.bodies import Halfspace, axis
    from convex_truncation.samplers.factory import sample_truncated
    from convex_truncation.testers.statistics import mean_estimator

    batch = sample_truncated(Halfspace(axis(10), 0.0), 20000, rng)
    L = mean_estimator(batch, 0.01)
    assert abs(float(L[0]) - math.sqrt(2.0 / math.pi)) < 0.02
    assert float(torch.linalg.norm(L[1:])) < 0.1
