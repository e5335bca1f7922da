"""Empirical probes of the inequalities the distinguishers rely on."""

from typing import Any, Dict, List, Sequence

from convex_truncation.bodies.bodies import ConvexBody
from convex_truncation.gauss.rng import RngStream
from convex_truncation.samplers.factory import sample_truncated
from convex_truncation.testers.statistics import statistic_M


def mean_drop_kappa(
    bodies: Sequence[ConvexBody], trials: int, rng: RngStream
) -> Dict[str, Any]:
    """Fit κ in E_{N|K}|x|² <= n - κ ε over symmetric bodies with ε = 1 - vol(K).

    Body i is sampled on rng.spawn(i). The reported κ is the smallest per-body ratio
    (n - E|x|²) / ε; it is a probe of the unnamed constant, not a certified bound.

    """
    rows: List[Dict[str, Any]] = []
    for i, body in enumerate(bodies):
        if not body.is_symmetric:
            raise ValueError("mean-drop probe only covers symmetric bodies, got %r" % body)
        vol = body.exact_volume()
        if vol is None or not 0.0 < vol < 1.0:
            raise ValueError("mean-drop probe needs a closed-form volume in (0, 1) for %r" % body)
        batch = sample_truncated(body, trials, rng.spawn(i))
        eps = 1.0 - vol
        mean_sq = statistic_M(batch)
        rows.append({
            "body": body.to_dict(),
            "eps": eps,
            "mean_sq_norm": mean_sq,
            "kappa": (body.n - mean_sq) / eps,
        })
    return {"kappa": min(r["kappa"] for r in rows), "bodies": rows}
