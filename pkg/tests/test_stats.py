from __future__ import annotations

import numpy as np
import pytest

from oracles import normal_equations_ols, t_tail_quadrature
from postmine.corpus import InstitutionRecord, Region
from postmine.errors import DataError, RankDeficientError
from postmine.stats import (
    DESIGN_COLUMNS,
    DesignMatrix,
    build_design,
    normalize_rate,
    ols_fit,
    t_pvalue,
    unique_user_rates,
    write_regression_report,
)


class TestNormalizeRate:
    def test_zero_count(self):
        assert normalize_rate(0, 5000) == 0.0

    def test_simple_division(self):
        assert normalize_rate(10, 5000) == pytest.approx(0.002)

    def test_aggregate_sanity_total(self):
        # 2,939 cases over a 200-school combined enrollment
        total_enrollment = 200 * 10_000
        assert normalize_rate(2939, total_enrollment) == pytest.approx(2939 / 2e6)

    def test_bad_enrollment_rejected(self):
        with pytest.raises(ValueError):
            normalize_rate(1, 0)


def make_institution(inst_id="u1", enrollment=5000, mf=0.9, private=True,
                     region=Region.MIDWEST, cases=10):
    return InstitutionRecord(inst_id, enrollment, mf, private, region, cases)


class TestBuildDesign:
    def test_midwest_is_reference_category(self):
        design = build_design([make_institution(region=Region.MIDWEST)],
                              {"u1": 0.01})
        row = design.rows[0]
        assert list(row[3:6]) == [0.0, 0.0, 0.0]
        assert row[2] == 1.0  # private

    def test_northeast_public(self):
        design = build_design(
            [make_institution(region=Region.NORTHEAST, private=False)],
            {"u1": 0.01})
        row = design.rows[0]
        assert list(row[3:6]) == [1.0, 0.0, 0.0]
        assert row[2] == 0.0

    def test_column_order(self):
        assert DESIGN_COLUMNS == (
            "M/F Ratio", "Enrollment", "Private", "Northeast", "West",
            "South", "Normalized cases count", "constant")
        design = build_design([make_institution()], {"u1": 0.0})
        assert design.feature_names == DESIGN_COLUMNS
        assert design.rows[0][-1] == 1.0
        assert design.rows[0][6] == pytest.approx(10 / 5000)

    def test_missing_rate_fatal(self):
        with pytest.raises(DataError, match="u1"):
            build_design([make_institution()], {})


class TestOlsFit:
    def test_perfect_line(self):
        design = DesignMatrix(
            ("x", "constant"),
            np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]),
            np.array([3.0, 5.0, 7.0]))
        result = ols_fit(design)
        assert result.coefficients == pytest.approx([2.0, 1.0], abs=1e-12)
        assert result.r_squared == pytest.approx(1.0)
        residuals = design.response - design.rows @ result.coefficients
        assert float(residuals @ residuals) == pytest.approx(0.0, abs=1e-20)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            x = rng.normal(size=(50, 4))
            x[:, -1] = 1.0
            y = x @ rng.normal(size=4) + rng.normal(scale=0.3, size=50)
            design = DesignMatrix(tuple("abcd"), x, y)
            result = ols_fit(design)
            beta, se, t = normal_equations_ols(x, y)
            assert np.allclose(result.coefficients, beta, rtol=1e-8)
            assert np.allclose(result.std_errors, se, rtol=1e-8)
            assert np.allclose(result.t_stats, t, rtol=1e-8)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(60, 5))
        x[:, -1] = 1.0
        y = rng.normal(size=60)
        design = DesignMatrix(tuple("abcde"), x, y)
        result = ols_fit(design)
        residuals = y - x @ result.coefficients
        scale = 1.0 + np.max(np.abs(x.T @ y))
        assert np.max(np.abs(x.T @ residuals)) <= 1e-8 * scale

    def test_duplicate_column_rejected_with_name(self):
        x = np.ones((10, 3))
        rng = np.random.default_rng(0)
        x[:, 0] = rng.normal(size=10)
        x[:, 1] = x[:, 0]
        design = DesignMatrix(("first", "copy_of_first", "constant"),
                              x, rng.normal(size=10))
        with pytest.raises(RankDeficientError, match="copy_of_first"):
            ols_fit(design)

    def test_underdetermined_rejected(self):
        x = np.eye(3)
        design = DesignMatrix(("a", "b", "c"), x, np.ones(3))
        with pytest.raises(DataError, match="n=3, p=3"):
            ols_fit(design)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(40, 3))
        x[:, -1] = 1.0
        y = rng.normal(size=40)
        base = ols_fit(DesignMatrix(("a", "b", "constant"), x, y))
        scaled_x = x.copy()
        scaled_x[:, 0] *= 10.0
        scaled = ols_fit(DesignMatrix(("a", "b", "constant"), scaled_x, y))
        assert scaled.coefficients[0] == pytest.approx(base.coefficients[0] / 10,
                                                       rel=1e-8)
        assert scaled.t_stats[0] == pytest.approx(base.t_stats[0], rel=1e-8)
        assert scaled.p_values[0] == pytest.approx(base.p_values[0], rel=1e-8)
        assert np.allclose(scaled_x @ scaled.coefficients, x @ base.coefficients,
                           rtol=1e-8)

    def test_planted_coefficients_recovered(self):
        rng = np.random.default_rng(21)
        regions = [Region.NORTHEAST, Region.SOUTH, Region.WEST, Region.MIDWEST]
        institutions = [
            make_institution(
                inst_id=f"u{i}",
                enrollment=int(rng.integers(2000, 40000)),
                mf=float(rng.uniform(0.5, 1.5)),
                private=bool(rng.integers(0, 2)),
                region=regions[i % 4],
                cases=int(rng.integers(0, 50)),
            )
            for i in range(40)
        ]
        planted = np.array([0.002, 1e-7, 0.003, 0.08, 0.09, 0.075, 0.9, -0.05])
        probe = build_design(institutions, {f"u{i}": 0.0 for i in range(40)})
        y = probe.rows @ planted + rng.normal(scale=1e-4, size=40)
        design = DesignMatrix(probe.feature_names, probe.rows, y)
        result = ols_fit(design)
        beta, _, _ = normal_equations_ols(probe.rows, y)
        assert np.allclose(result.coefficients, beta, rtol=1e-8)
        assert np.allclose(result.coefficients, planted, atol=2e-3)


class TestTPValue:
    def test_t_zero_gives_one(self):
        assert t_pvalue(0.0, 7) == 1.0

    def test_reference_value_against_quadrature(self):
        value = t_pvalue(2.0, 10)
        assert value == pytest.approx(0.0734, abs=5e-4)
        assert value == pytest.approx(t_tail_quadrature(2.0, 10), abs=1e-10)

    def test_symmetric_and_monotone(self):
        for dof in (1, 5, 30):
            values = [t_pvalue(t, dof) for t in (0.0, 0.5, 1.0, 2.0, 5.0, 50.0)]
            assert all(0.0 <= v <= 1.0 for v in values)
            assert values == sorted(values, reverse=True)
            assert t_pvalue(-2.5, dof) == t_pvalue(2.5, dof)

    def test_large_t_tends_to_zero(self):
        assert t_pvalue(1e8, 10) < 1e-12

    def test_matches_quadrature_on_grid(self):
        for dof in (1, 2, 5, 10, 60):
            for t in (0.1, 0.7, 1.5, 2.3, 4.0):
                assert t_pvalue(t, dof) == pytest.approx(
                    t_tail_quadrature(t, dof), abs=1e-9)

    def test_bad_dof(self):
        with pytest.raises(ValueError):
            t_pvalue(1.0, 0)


def test_unique_user_rates_defaults_to_zero():
    institutions = [make_institution("u1", enrollment=100),
                    make_institution("u2", enrollment=200)]
    rates = unique_user_rates({"u1": {"a", "b"}}, institutions)
    assert rates == {"u1": 0.02, "u2": 0.0}


def test_report_schema(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 3))
    x[:, -1] = 1.0
    y = rng.normal(size=30)
    result = ols_fit(DesignMatrix(("alpha", "beta", "constant"), x, y))
    path = tmp_path / "regression.csv"
    write_regression_report(result, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "feature,coefficient,std_err,t_stat,p_value"
    assert [line.split(",")[0] for line in lines[1:4]] == ["alpha", "beta", "constant"]
    assert lines[-1].startswith("# n=30 p=3 r_squared=")
