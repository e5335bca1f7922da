from dataclasses import dataclass


@dataclass(frozen=True)
class _Tolerances:
    # relative symmetry tolerance for PsdMatrix
    symmetry: float = 1e-12
    # pivot <= pivot * max(diag) counts as singular
    pivot: float = 1e-12
    # relative Frobenius error of chol @ chol.T
    reconstruction: float = 1e-10
    # |v.x| below this counts as on the hyperplane
    hyperplane: float = 1e-9
    unit_norm: float = 1e-12
    bisection_iters: int = 60
    bisection_tol: float = 1e-13
    weiszfeld_iters: int = 200
    weiszfeld_tol: float = 1e-10


TOLERANCES = _Tolerances()

# rows per substream when generating sample blocks
CHUNK_ROWS = 4096
