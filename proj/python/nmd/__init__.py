"""Low-rank plus sparse matrix decomposition under noise."""

from ._core import (
    DimensionError,
    bad_pair,
    corollary_rate_sparse_gaussian,
    decomposition_error,
    derive_seed,
    dual_value,
    gen_gaussian_noise,
    gen_low_rank,
    gen_sparse,
    gen_twostep_failure_design,
    gen_wishart_noise,
    kappa,
    norm,
    params_col_gaussian,
    params_multitask,
    params_sparse_gaussian,
    project_spikiness_ball,
    prox,
    reg_value,
    run_sweep,
    solve,
    spikiness,
    svd,
    svt,
    two_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
