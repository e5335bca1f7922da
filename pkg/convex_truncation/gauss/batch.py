"""Data carriers: sample blocks and symmetric PSD matrices."""

from dataclasses import dataclass
import os
from typing import Optional

import numpy as np
import pandas as pd
import torch
from torchtyping import TensorType

from convex_truncation.gauss import TOLERANCES

# binary layout: 8 little-endian uint64 header words, then row-major float64 data
_BINARY_MAGIC = 0x48435254564E4F43  # "CONVTRCH"
_BINARY_VERSION = 1
_DTYPE_FLOAT64 = 1


@dataclass
class SampleBatch:
    """A T x n block of samples together with the stream that generated it."""

    data: TensorType["num_samples", "dim", torch.float64]
    master_seed: int = 0
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.data, torch.Tensor):
            self.data = torch.as_tensor(np.asarray(self.data), dtype=torch.float64)
        if self.data.dtype != torch.float64:
            self.data = self.data.to(torch.float64)
        if self.data.ndim != 2:
            raise ValueError(
                "sample data must be a 2d (count, dim) block, got shape %s"
                % (tuple(self.data.shape),)
            )
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError("sample block must have positive count and dim")
        if not bool(torch.isfinite(self.data).all()):
            raise ValueError("sample block contains non-finite entries")

    @property
    def count(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    @property
    def sq_norms(self) -> TensorType["num_samples", torch.float64]:
        return (self.data * self.data).sum(dim=1)

    def header(self) -> str:
        return "# seed=%i, stream=%i, n=%i, T=%i" % (
            self.master_seed, self.stream_index, self.dim, self.count
        )

    def to_csv(self, path: str) -> None:
        """Write a header line followed by one row per sample."""
        with open(path, "w") as f:
            f.write(self.header() + "\n")
            pd.DataFrame(self.data.numpy()).to_csv(
                f, header=False, index=False, float_format="%.17g"
            )

    @classmethod
    def from_csv(cls, path: str) -> "SampleBatch":
        with open(path, "r") as f:
            header = f.readline()
        fields = _parse_header(header)
        df = pd.read_csv(path, skiprows=1, header=None, float_precision="round_trip")
        data = torch.tensor(df.to_numpy(dtype=np.float64), dtype=torch.float64)
        if data.shape != (fields["T"], fields["n"]):
            raise IOError(
                "%s: header announces (T=%i, n=%i) but body has shape %s"
                % (path, fields["T"], fields["n"], tuple(data.shape))
            )
        return cls(data=data, master_seed=fields["seed"], stream_index=fields["stream"])

    def to_binary(self, path: str) -> None:
        header = np.array(
            [_BINARY_MAGIC, _BINARY_VERSION, self.master_seed, self.stream_index,
             self.dim, self.count, _DTYPE_FLOAT64, 0],
            dtype="<u8",
        )
        with open(path, "wb") as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(self.data.numpy(), dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path: str) -> "SampleBatch":
        if not os.path.isfile(path):
            raise FileNotFoundError(path)
        raw = np.fromfile(path, dtype="<u8", count=8)
        if raw.shape[0] != 8 or int(raw[0]) != _BINARY_MAGIC:
            raise IOError("%s is not a sample batch file" % path)
        if int(raw[6]) != _DTYPE_FLOAT64:
            raise NotImplementedError("unsupported dtype code %i" % int(raw[6]))
        n, T = int(raw[4]), int(raw[5])
        values = np.fromfile(path, dtype="<f8", offset=64)
        return cls(
            data=torch.from_numpy(values.reshape(T, n).astype(np.float64)),
            master_seed=int(raw[2]),
            stream_index=int(raw[3]),
        )


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise IOError("sample csv must start with a '# seed=..., stream=..., n=..., T=...' line")
    fields = {}
    for item in line.lstrip("#").split(","):
        key, _, value = item.strip().partition("=")
        fields[key] = int(value)
    for key in ("seed", "stream", "n", "T"):
        if key not in fields:
            raise IOError("sample csv header is missing '%s'" % key)
    return fields


@dataclass
class PsdMatrix:
    """Symmetric p x p matrix with an optional cached Cholesky factor and log-det."""

    entries: TensorType["p", "p", torch.float64]
    chol: Optional[TensorType["p", "p", torch.float64]] = None
    logdet: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.entries, torch.Tensor):
            self.entries = torch.as_tensor(np.asarray(self.entries), dtype=torch.float64)
        self.entries = self.entries.to(torch.float64)
        if self.entries.ndim == 0:
            self.entries = self.entries.reshape(1, 1)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError("PsdMatrix needs a square matrix, got %s" % (tuple(self.entries.shape),))
        scale = float(self.entries.abs().max())
        asym = float((self.entries - self.entries.T).abs().max())
        if asym > TOLERANCES.symmetry * max(scale, 1.0):
            raise ValueError("matrix is not symmetric (max asymmetry %.3e)" % asym)
        if self.chol is not None:
            recon = self.chol @ self.chol.T
            err = torch.linalg.norm(recon - self.entries) / max(float(torch.linalg.norm(self.entries)), 1e-300)
            if float(err) > TOLERANCES.reconstruction:
                raise ValueError("cached Cholesky factor does not reconstruct the matrix")

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def factorize(self) -> "PsdMatrix":
        """Populate chol/logdet in place and return self; raises NotPositiveDefinite."""
        if self.chol is None or self.logdet is None:
            from convex_truncation.gauss.linalg import chol_logdet

            self.chol, self.logdet = chol_logdet(self)
        return self
