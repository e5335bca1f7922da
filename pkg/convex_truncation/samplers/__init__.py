from convex_truncation.samplers.factory import (
    SamplerPlan,
    rejection_rate_probe,
    sample_ball_hyperplane,
    sample_truncated,
)
from convex_truncation.samplers.samplers import get_sampler_classes
