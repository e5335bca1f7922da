"""Test the sample batch carrier and its file formats."""

import os

import numpy as np
import pytest
import torch


def test_batch_validation():

    from convex_truncation.gauss.batch import SampleBatch

    batch = SampleBatch(data=np.ones((4, 3)), master_seed=1, stream_index=2)
    assert batch.data.dtype == torch.float64
    assert (batch.count, batch.dim) == (4, 3)
    assert torch.equal(batch.sq_norms, 3.0 * torch.ones(4, dtype=torch.float64))

    with pytest.raises(ValueError):
        SampleBatch(data=np.ones(4))
    with pytest.raises(ValueError):
        SampleBatch(data=np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        SampleBatch(data=np.array([[np.inf, 0.0]]))


def test_csv_file(tmpdir, rng):

    from convex_truncation.gauss.batch import SampleBatch
    from convex_truncation.gauss.primitives import gaussian_batch

    batch = gaussian_batch(5, 40, rng)
    path = os.path.join(tmpdir, "samples.csv")
    batch.to_csv(path)

    with open(path, "r") as f:
        header = f.readline().strip()
    assert header == "# seed=%i, stream=%i, n=5, T=40" % (rng.master_seed, rng.stream_index)

    loaded = SampleBatch.from_csv(path)
    # full precision decimal keeps every bit
    assert torch.equal(loaded.data, batch.data)
    assert loaded.master_seed == batch.master_seed
    assert loaded.stream_index == batch.stream_index


def test_csv_header_mismatch(tmpdir):

    from convex_truncation.gauss.batch import SampleBatch

    path = os.path.join(tmpdir, "bad.csv")
    with open(path, "w") as f:
        f.write("# seed=1, stream=0, n=2, T=3\n1.0,2.0\n3.0,4.0\n")
    with pytest.raises(IOError):
        SampleBatch.from_csv(path)

    with open(path, "w") as f:
        f.write("1.0,2.0\n")
    with pytest.raises(IOError):
        SampleBatch.from_csv(path)


def test_binary_file(tmpdir, rng):

    from convex_truncation.gauss.batch import SampleBatch
    from convex_truncation.gauss.primitives import gaussian_batch

    batch = gaussian_batch(3, 25, rng)
    path = os.path.join(tmpdir, "samples.bin")
    batch.to_binary(path)
    # 8 header words, then T x n doubles
    assert os.path.getsize(path) == 8 * 8 + 25 * 3 * 8

    loaded = SampleBatch.from_binary(path)
    assert torch.equal(loaded.data, batch.data)
    assert loaded.master_seed == rng.master_seed

    with open(path, "r+b") as f:
        f.write(b"\x00" * 8)
    with pytest.raises(IOError):
        SampleBatch.from_binary(path)
