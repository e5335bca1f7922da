from convex_truncation.lb.constructions import (
    grid_birthday_demo,
    slab_lb_typicality_probe,
    tuple_is_atypical,
)
from convex_truncation.lb.divergences import (
    coupling_tv_bound,
    gaussian_tv_bound,
    gaussian_tv_quadrature_2d,
    hellinger_sq_gaussians,
)
from convex_truncation.lb.mixture import (
    MixtureLbParams,
    MixtureLbWeights,
    mixture_lb_density,
    mixture_lb_density_check,
    mixture_lb_weights,
    sample_mixture_lb,
)
from convex_truncation.lb.power import empirical_power_at_budget
from convex_truncation.lb.wishart import (
    WishartParams,
    alpha_pn,
    estimate_tv_wishart,
    gram_matrix,
    logdet_clt_check,
    wishart_batch,
    wishart_log_density,
    wishart_sample,
)
