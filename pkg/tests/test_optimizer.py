import math

import numpy as np
import pytest
from scipy.integrate import quad

import tfqkd.optimizer as optimizer_module
from tfqkd.errors import DomainError, NumericFailure
from tfqkd.optimizer import (
    OptimizerConfig,
    c_surface,
    minimize_beta,
    optimize_point,
    sweep,
    u_functional,
    _golden_min,
)


def _u_per_term_quadrature(m, alpha, beta):
    """Independent oracle: piecewise quadrature of each L1 term."""
    w_sym = 0.5 * alpha
    w_con = 0.5 * beta * m
    centers = np.arange(1, m + 1) - 0.5 * (m + 1)
    reach = 0.5 * m + 6.0 * max(w_sym, w_con)
    total = 0.0
    for c in centers:
        f = lambda t: abs(
            math.exp(-(((t - c) / w_sym) ** 2)) / (w_sym * math.sqrt(math.pi))
            - math.exp(-((t / w_con) ** 2)) / (w_con * math.sqrt(math.pi))
        )
        edges = np.linspace(-reach, reach, 40)
        total += sum(
            quad(f, lo, hi, limit=100)[0] for lo, hi in zip(edges[:-1], edges[1:])
        )
    return total


class TestUFunctional:
    @pytest.mark.parametrize("m,alpha,beta", [(2, 0.5, 1.1), (4, 0.5, 0.7), (8, 0.3, 0.9)])
    def test_per_term_matches_quadrature(self, m, alpha, beta):
        assert u_functional(m, alpha, beta) == pytest.approx(
            _u_per_term_quadrature(m, alpha, beta), abs=1e-7
        )

    def test_bounds(self):
        for m, alpha, beta in [(2, 0.1, 0.1), (4, 1.5, 1.5), (8, 0.7, 0.05)]:
            u = u_functional(m, alpha, beta)
            assert 0.0 <= u <= 2.0 * m

    def test_wide_conjugate_limit(self):
        assert u_functional(4, 0.5, 1e6) == pytest.approx(8.0, abs=1e-3)

    def test_whole_sum_below_per_term(self):
        for alpha in (0.3, 0.6, 1.0):
            for beta in (0.4, 0.7, 1.2):
                per = u_functional(4, alpha, beta, "per-term")
                whole = u_functional(4, alpha, beta, "whole-sum")
                assert whole <= per + 1e-7

    def test_unique_interior_minimum_m2(self):
        # dense scan: the difference changes sign exactly once
        betas = np.arange(0.3, 1.5001, 0.01)
        us = np.array([u_functional(2, 0.5, b) for b in betas])
        k = int(np.argmin(us))
        assert 0 < k < betas.size - 1
        diffs = np.sign(np.diff(us))
        flips = np.nonzero(np.diff(diffs) != 0)[0]
        assert flips.size == 1

    def test_rejects_unknown_variant(self):
        with pytest.raises(DomainError):
            u_functional(4, 0.5, 0.7, "median")


class TestMinimizeBeta:
    def test_matches_dense_grid(self):
        betas = np.arange(0.05, 1.5001, 1e-3)
        us = np.array([u_functional(16, 0.5, b) for b in betas])
        brute = betas[int(np.argmin(us))]
        beta_opt, u_min = minimize_beta(16, 0.5)
        assert beta_opt == pytest.approx(brute, abs=2e-3)
        assert u_min <= us.min() + 1e-9

    @pytest.mark.parametrize("m", [16, 32])
    def test_large_m_lands_near_typical_width(self, m):
        beta_opt, _ = minimize_beta(m, 0.5)
        assert 0.5 <= beta_opt <= 0.9

    def test_deterministic(self):
        a = minimize_beta(8, 0.4)
        b = minimize_beta(8, 0.4)
        assert a == b

    def test_argmin_invariant_under_rescaling(self):
        # positive rescaling of the objective must not move the minimizer
        base, _, _ = _golden_min(lambda b: u_functional(4, 0.5, b), 0.4, 1.2, 1e-4)
        scaled, _, _ = _golden_min(lambda b: 7.3 * u_functional(4, 0.5, b), 0.4, 1.2, 1e-4)
        assert scaled == pytest.approx(base, abs=1e-4)

    def test_rejects_bad_box(self):
        with pytest.raises(DomainError):
            minimize_beta(4, 0.5, search_box=(0.9, 0.2))


class TestCSurface:
    def test_values_within_bounds(self):
        grid = c_surface(4, 0.5, np.arange(0.2, 1.01, 0.2), np.arange(0.3, 1.01, 0.35))
        assert np.all(grid.capacity >= 0.0)
        assert np.all(grid.capacity <= 2.0)
        assert np.all(np.isfinite(grid.capacity))
        assert grid.failures == ()

    def test_no_attack_rows_decrease_with_alpha(self):
        grid = c_surface(4, 0.0, np.arange(0.1, 1.51, 0.1), np.array([0.7]))
        assert np.all(np.diff(grid.capacity[:, 0]) <= 1e-12)

    def test_deterministic(self):
        a = c_surface(4, 0.5, np.array([0.4, 0.8]), np.array([0.6, 0.9]))
        b = c_surface(4, 0.5, np.array([0.4, 0.8]), np.array([0.6, 0.9]))
        assert np.array_equal(a.capacity, b.capacity)

    def test_rejects_bad_axes(self):
        with pytest.raises(DomainError):
            c_surface(4, 0.5, np.array([0.8, 0.4]), np.array([0.6]))
        with pytest.raises(DomainError):
            c_surface(4, 0.5, np.array([-0.1, 0.4]), np.array([0.6]))

    def test_alpha_dependence_dwarfs_beta_dependence(self):
        grid = c_surface(4, 0.5, np.arange(0.1, 1.5001, 0.1), np.arange(0.5, 1.0001, 0.1))
        i, j = np.unravel_index(np.argmax(grid.capacity), grid.capacity.shape)
        var_alpha = grid.capacity[:, j].max() - grid.capacity[:, j].min()
        var_beta = grid.capacity[i, :].max() - grid.capacity[i, :].min()
        assert var_alpha > 0.5 * grid.capacity.max()
        assert var_beta < 0.05 * var_alpha


class TestOptimizePoint:
    def test_no_attack_pins_smallest_alpha(self):
        res = optimize_point(4, 0.0)
        assert res.alpha_opt == pytest.approx(0.05)
        assert res.c_opt >= 0.99 * 2.0

    def test_heavy_attack_plateau(self):
        res = optimize_point(4, 0.9)
        assert res.c_opt == 0.0
        assert res.alpha_opt == pytest.approx(0.05)  # smallest point of the plateau
        assert res.report.capacity == 0.0

    def test_refinement_never_below_grid(self):
        config = OptimizerConfig(coarse_step=0.1)
        res = optimize_point(4, 0.5, config)
        alpha_axis = set(np.round(0.05 + 0.1 * np.arange(15), 12)) | {0.05}
        grid_vals = [
            c for (a, b, c) in res.trace
            if round(a, 12) in alpha_axis and round(b, 12) in alpha_axis
        ]
        assert res.stage1_capacity >= max(grid_vals) - 1e-12

    def test_result_recomputes_consistently(self):
        from tfqkd.channel import ProtocolParams
        from tfqkd.infotheory import capacity as cap_fn

        res = optimize_point(4, 0.5)
        rep = cap_fn(ProtocolParams(4, res.alpha_opt, res.beta_opt, 0.5))
        assert res.c_opt == pytest.approx(rep.capacity, abs=1e-9)

    def test_optimum_inside_box(self):
        config = OptimizerConfig(alpha_box=(0.2, 1.0), beta_box=(0.3, 1.2), coarse_step=0.1)
        res = optimize_point(4, 0.5, config)
        assert 0.2 <= res.alpha_opt <= 1.0
        assert 0.3 <= res.beta_opt <= 1.2

    def test_deterministic(self):
        a = optimize_point(4, 0.25)
        b = optimize_point(4, 0.25)
        assert (a.alpha_opt, a.beta_opt, a.c_opt, a.u_min) == (
            b.alpha_opt, b.beta_opt, b.c_opt, b.u_min
        )
        assert a.trace == b.trace

    def test_nested_scheme_keeps_capacity_optimum(self):
        config = OptimizerConfig(scheme="nested", coarse_step=0.1)
        res = optimize_point(4, 0.5, config)
        grid_vals = [c for (_, _, c) in res.trace]
        assert res.c_opt >= max(grid_vals) - 1e-12
        assert res.scheme == "nested"

    def test_rejects_bad_config(self):
        with pytest.raises(DomainError):
            OptimizerConfig(scheme="random")
        with pytest.raises(DomainError):
            OptimizerConfig(alpha_box=(1.0, 0.5))


class TestSweep:
    def test_ordering(self):
        config = OptimizerConfig(coarse_step=0.25)
        entries = sweep([2, 4], [0.0, 0.9], config)
        assert [(e.m, e.epsilon) for e in entries] == [(2, 0.0), (2, 0.9), (4, 0.0), (4, 0.9)]
        assert all(e.status == "ok" for e in entries)

    def test_failures_recorded_but_sweep_continues(self, monkeypatch):
        real = optimizer_module.optimize_point

        def flaky(m, epsilon, config=OptimizerConfig()):
            if m == 4:
                raise NumericFailure("forced failure")
            return real(m, epsilon, config)

        monkeypatch.setattr(optimizer_module, "optimize_point", flaky)
        entries = sweep([2, 4], [0.0], OptimizerConfig(coarse_step=0.25))
        assert entries[0].status == "ok"
        assert entries[1].status == "failed"
        assert "forced failure" in entries[1].error

    def test_rejects_empty_lists(self):
        with pytest.raises(DomainError):
            sweep([], [0.1])

    def test_threaded_matches_sequential(self):
        seq = sweep([2, 4], [0.0, 0.5], OptimizerConfig(coarse_step=0.25))
        par = sweep([2, 4], [0.0, 0.5], OptimizerConfig(coarse_step=0.25, threads=4))
        for a, b in zip(seq, par):
            assert (a.m, a.epsilon, a.status) == (b.m, b.epsilon, b.status)
            assert a.result.alpha_opt == b.result.alpha_opt
            assert a.result.beta_opt == b.result.beta_opt
            assert a.result.c_opt == b.result.c_opt
