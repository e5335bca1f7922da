import math
from typing import Tuple

from typeguard import typechecked

from convex_truncation.bodies.bodies import ConvexBody
from convex_truncation.gauss.primitives import gaussian_batch
from convex_truncation.gauss.rng import RngStream


@typechecked
def mc_volume(body: ConvexBody, trials: int, rng: RngStream) -> Tuple[float, float]:
    """Monte Carlo Gaussian volume with its binomial standard error.

    Args:
        body: any body, including intersections and grid unions
        trials: number of N(0, I_n) probes, at least 100
        rng: stream owning the probe block

    Returns:
        tuple
            - estimate (float): fraction of probes inside the body
            - stderr (float): sqrt(p (1 - p) / trials)

    """
    if trials < 100:
        raise ValueError("mc_volume needs at least 100 trials, got %i" % trials)
    probes = gaussian_batch(body.n, trials, rng)
    p = float(body.contains(probes.data).to(float).mean())
    return p, math.sqrt(p * (1.0 - p) / trials)
