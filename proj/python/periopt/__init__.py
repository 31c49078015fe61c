"""Periodic-evaluation portfolio optimization: fixed points, duality, verification."""

try:
    from ._periopt import (  # noqa: F401
        C_star,
        RunConfig,
        __version__,
        check_standing_assumption,
        contraction_factor,
        estimate_M0,
        log_optimal_policy,
        quadrature_oracle,
        simulate_terminal_stats,
        solve_fixed_point,
        solve_one_period,
        theta,
        validate,
        value_function,
        zeta,
    )
except ImportError:  # build-tree layout: the module sits next to the package
    from _periopt import (  # noqa: F401
        C_star,
        RunConfig,
        __version__,
        check_standing_assumption,
        contraction_factor,
        estimate_M0,
        log_optimal_policy,
        quadrature_oracle,
        simulate_terminal_stats,
        solve_fixed_point,
        solve_one_period,
        theta,
        validate,
        value_function,
        zeta,
    )
