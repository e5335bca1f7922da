from dataclasses import asdict, dataclass
from typing import Any, Dict


@dataclass(frozen=True)
class DefaultConstants:
    """Operational values for the constants the distinguishers leave unnamed.

    Bump `version` whenever a value changes; every report echoes it.

    """

    version: str = "1"
    # M threshold is n - c_sym * eps / 2; the null false-alarm rate is
    # Φ(-c_sym * sqrt(C_sample) / (2 sqrt(2))), about 5.5% at these defaults
    c_sym: float = 1.6
    # auto-sized T = C_sample * n / eps^2 (and the sqrt(n) form for ltf)
    C_sample: float = 8.0
    # robust-mean branch: truncated if |L|^2 >= L_threshold
    L_threshold: float = 0.05
    # ltf threshold is n / T + N_threshold_c * eps^2
    N_threshold_c: float = 0.5
    # failure probability handed to the mean estimator
    delta: float = 0.01
    # rejection sampler proposals per requested row
    max_attempts: int = 1000000

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_CONSTANTS = DefaultConstants()
