import math
import os

import numpy as np
import pytest

from graphcorr.experiments import (
    CSV_HEADER,
    ErrorEstimate,
    SweepConfig,
    exact_min_error_er,
    exact_tv_er,
    find_p_star,
    min_error_sum,
    run_sweep,
    sweep_rows,
    threshold_curves,
)
from graphcorr.errors import ExactLimitError
from graphcorr.moments import exact_er_lr_table
from graphcorr.sampling import ErParams


class TestSweep:
    def small_config(self, **kw):
        base = dict(
            model="er",
            n_values=(10,),
            tests=("qap-ls", "edges"),
            trials=8,
            master_seed=7,
            p_values=(0.3,),
            s_values=(0.7,),
        )
        base.update(kw)
        return SweepConfig(**base)

    def test_deterministic_csv(self):
        cfg = self.small_config()
        assert run_sweep(cfg) == run_sweep(cfg)

    def test_parallel_matches_serial(self):
        cfg = self.small_config(n_values=(8, 10), s_values=(0.5, 0.9))
        serial = run_sweep(cfg)
        os.environ["GRAPHCORR_WORKERS"] = "2"
        try:
            parallel = run_sweep(cfg)
        finally:
            del os.environ["GRAPHCORR_WORKERS"]
        assert serial == parallel

    def test_schema(self):
        cfg = self.small_config()
        text = run_sweep(cfg)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(cfg.cells()) * len(cfg.tests)
        first = lines[1].split(",")
        assert first[0] == "er" and first[5] in cfg.tests

    def test_rows_in_grid_order(self):
        cfg = self.small_config(n_values=(8, 10), s_values=(0.5, 0.9), tests=("edges",))
        rows = sweep_rows(cfg)
        ns = [int(r.split(",")[1]) for r in rows]
        assert ns == sorted(ns)

    def test_gaussian_rho_zero_error_sum_near_one(self):
        cfg = SweepConfig(
            model="gaussian",
            n_values=(8,),
            tests=("qap-exact",),
            trials=40,
            master_seed=11,
            rho_values=(0.0,),
        )
        row = sweep_rows(cfg)[0].split(",")
        err_sum, ci = float(row[9]), float(row[10])
        assert abs(err_sum - 1.0) <= max(2 * ci, 0.05)

    def test_er_strong_signal_low_error(self):
        # isomorphic pair at s=1: the local-search statistic separates sharply
        cfg = SweepConfig(
            model="er",
            n_values=(30,),
            tests=("qap-ls",),
            trials=60,
            master_seed=12,
            p_values=(0.2,),
            s_values=(1.0,),
        )
        row = sweep_rows(cfg)[0].split(",")
        assert float(row[9]) <= 0.1

    def test_oracle_mode_never_worse_than_auto(self):
        auto = self.small_config(trials=30)
        oracle = self.small_config(trials=30, threshold_mode="oracle")
        for ra, ro in zip(sweep_rows(auto), sweep_rows(oracle)):
            assert float(ro.split(",")[9]) <= float(ra.split(",")[9]) + 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            self.small_config(model="gaussian")  # edges test with gaussian
        with pytest.raises(ValueError):
            self.small_config(trials=0)
        with pytest.raises(ValueError):
            self.small_config(tests=("nope",))
        with pytest.raises(ValueError):
            SweepConfig(
                model="er", n_values=(), tests=("edges",), trials=1, master_seed=0,
                p_values=(0.5,), s_values=(0.5,),
            )

    def test_min_error_sum_helper(self):
        err, tau = min_error_sum([0, 1, 2, 3], [10, 11, 12, 13])
        assert err == 0.0 and 3 < tau <= 10
        err, _ = min_error_sum([0, 1], [0, 1])
        assert err == pytest.approx(1.0)


class TestErrorEstimate:
    def test_fields(self):
        est = ErrorEstimate(0.2, 0.1, 0.05, 0.04, 100)
        assert est.err_sum == pytest.approx(0.3)
        assert est.ci == pytest.approx(math.hypot(0.05, 0.04))


class TestExactTv:
    def test_tiny_s_vanishes(self):
        assert exact_tv_er(ErParams(3, 0.4, 1e-4)) < 1e-3

    def test_s_one_in_unit_interval_and_matches_lr(self):
        params = ErParams(3, 0.5, 1.0)
        tv = exact_tv_er(params)
        assert 0 < tv < 1
        assert exact_min_error_er(params, "lr") == pytest.approx(1 - tv, abs=1e-9)

    def test_monotone_in_s(self):
        vals = [exact_tv_er(ErParams(3, 0.4, s)) for s in np.linspace(0.1, 1.0, 8)]
        assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))

    def test_refusal(self):
        with pytest.raises(ExactLimitError):
            exact_tv_er(ErParams(5, 0.3, 0.5))

    def test_lr_table_normalizations(self):
        # the likelihood ratio integrates to one under the null, and the
        # planted table is a probability distribution
        params = ErParams(3, 0.45, 0.55)
        lr, q = exact_er_lr_table(params)
        qq = q[:, None] * q[None, :]
        assert float((qq * lr).sum()) == pytest.approx(1.0, abs=1e-9)
        assert float(qq.sum()) == pytest.approx(1.0, abs=1e-12)


class TestLrDominance:
    def test_lr_betters_other_tests(self):
        for params in (ErParams(3, 0.3, 0.6), ErParams(4, 0.5, 0.5)):
            lr = exact_min_error_er(params, "lr")
            assert lr <= exact_min_error_er(params, "qap") + 1e-12
            assert lr <= exact_min_error_er(params, "edges") + 1e-12


class TestCurves:
    def test_gaussian_boundary_value(self):
        rows = threshold_curves("gaussian", 100, 100)
        _, n, up, lo = rows[1].split(",")
        assert float(up) == pytest.approx(4 * math.log(100) / 99, rel=1e-9)
        assert float(lo) == pytest.approx(4 * math.log(100) / 100, rel=1e-9)

    def test_er_rows(self):
        rows = threshold_curves("er", 50, 52, p=0.2)
        assert len(rows) == 4
        parts = rows[1].split(",")
        denom = 0.2 * (math.log(5) - 1 + 0.2)
        assert float(parts[3]) == pytest.approx(2 * math.log(50) / (49 * denom), rel=1e-9)
        assert float(parts[5]) == pytest.approx(min(1 / (50 * 0.2), 0.01), rel=1e-9)

    def test_er_boundary_diverges_near_full_density(self):
        rows_mid = threshold_curves("er", 50, 50, p=0.5)
        rows_hi = threshold_curves("er", 50, 50, p=0.999999)
        up_mid = float(rows_mid[1].split(",")[3])
        up_hi = float(rows_hi[1].split(",")[3])
        assert up_hi > 1e4 * up_mid

    def test_p_star(self):
        p = find_p_star()
        assert abs(math.log(1 / p) - 2 * (1 - p)) < 1e-6
        assert round(p, 3) == 0.203

    def test_er_requires_p(self):
        with pytest.raises(ValueError):
            threshold_curves("er", 10, 20)
