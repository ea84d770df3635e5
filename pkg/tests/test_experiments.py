# -*- coding: utf-8 -*-
"""
experiments 测试：实验配置、距离表、QQ 研究、方差比较、一致性研究与真实数据流水线

标记为 slow 的用例按完整规模运行（分钟级），默认跳过
"""
import hashlib
import json
import math

import numpy as np
import pandas as pd
import pytest

from modules.config import CONFIG
from modules.errors import DatasetMissingError, DomainError
from modules.estimation import SolverOptions
from modules.experiments import (SimConfig, default_pairs, parallel_map, qq_quantile_pairs, resolve_L,
                                 run_campaign, run_consistency_study, run_distance_table, run_qq_study,
                                 run_realdata, run_variance_comparison, write_realdata_report)
from modules.p0_model import linear_parameters


def small_config(**overrides) -> SimConfig:
    values = dict(n_values=[30], epsilon_spec=['2'], L_spec=['zero'], repetitions=6, base_seed=7,
                  mechanisms=['laplace', 'denoised_laplace', 'edge_flip'])
    values.update(overrides)
    return SimConfig(**values)


def _square(x):
    return x * x


class TestSimConfig:

    def test_resolve_L_tokens(self):
        assert resolve_L('zero', 100) == 0.0
        assert resolve_L('loglog_n', 100) == pytest.approx(math.log(math.log(100)))
        assert resolve_L('sqrt_log_n', 100) == pytest.approx(math.sqrt(math.log(100)))
        assert resolve_L('log_n', 100) == pytest.approx(math.log(100))
        assert resolve_L('1.5', 100) == 1.5
        with pytest.raises(DomainError):
            resolve_L('wide', 100)

    def test_default_pairs(self):
        assert default_pairs(100) == [(0, 1), (49, 50), (98, 99)]

    @pytest.mark.parametrize('overrides', [
        {'repetitions': 0},
        {'n_values': [1]},
        {'n_values': []},
        {'mechanisms': ['gaussian']},
        {'kind': 'histogram'},
        {'epsilon_spec': ['0']},
    ])
    def test_validation(self, overrides):
        with pytest.raises(DomainError):
            small_config(**overrides)

    def test_load_campaign_file(self, project_root):
        cfg = SimConfig.load(project_root / 'config' / 'experiments' / 'distance_table.json')
        assert cfg.kind == 'distance'
        assert cfg.repetitions == 500
        assert len(cfg.cells()) == 6
        assert {cell['epsilon_token'] for cell in cfg.cells()} == {'logn_h', 'logn_q', '2'}

    def test_config_hash_is_stable(self):
        assert small_config().config_hash() == small_config().config_hash()
        assert small_config().config_hash() != small_config(base_seed=8).config_hash()


class TestParallelMap:

    def test_preserves_order(self):
        assert parallel_map(_square, range(10), workers=2) == [x * x for x in range(10)]
        assert parallel_map(_square, range(10), workers=1) == [x * x for x in range(10)]


class TestDistanceTable:

    def test_schema_and_values(self):
        table = run_distance_table(small_config(), workers=1)
        assert list(table.columns) == ['n', 'epsilon_token', 'epsilon', 'L_token', 'L', 'mechanism',
                                       'repetitions', 'mean_distance', 'std_error']
        assert table['mechanism'].tolist() == ['laplace', 'denoised_laplace', 'edge_flip']
        assert (table['mean_distance'] > 0).all()
        assert (table['std_error'] >= 0).all()

    def test_huge_budget_releases_original(self):
        table = run_distance_table(small_config(epsilon_spec=['80']), workers=1)
        np.testing.assert_array_equal(table['mean_distance'].to_numpy(), 0.0)

    def test_independent_of_worker_count(self):
        cfg = small_config(repetitions=8)
        serial = run_distance_table(cfg, workers=1)
        parallel = run_distance_table(cfg, workers=2)
        pd.testing.assert_frame_equal(serial, parallel)

    def test_distance_shrinks_as_budget_grows(self):
        table = run_distance_table(small_config(epsilon_spec=['logn_h', '2'], repetitions=20,
                                                mechanisms=['laplace', 'edge_flip']), workers=1)
        for mechanism, group in table.groupby('mechanism'):
            values = group.sort_values('epsilon')['mean_distance'].to_numpy()
            assert values[0] > values[-1], mechanism


class TestQQStudy:

    def test_records_and_summary(self):
        cfg = small_config(kind='qq', mechanisms=['edge_flip', 'laplace'], stat_kinds=['xi', 'eta'])
        frames = run_qq_study(cfg, workers=1)
        records = frames['records']
        assert len(records) == 6 * 2 * 3 * 2
        assert {'rep', 'mechanism', 'pair_i', 'pair_j', 'kind', 'value', 'converged',
                'failure_reason'} <= set(records.columns)
        summary = frames['summary']
        assert len(summary) == 2 * 3 * 2
        np.testing.assert_allclose(summary['failure_rate'] + summary['successes'] / summary['repetitions'], 1.0)

    def test_variance_source_is_labelled(self):
        """拉普拉斯两列借用 p = 1 的 MLE 方差，边翻转列用自身的 σ²"""
        cfg = small_config(kind='qq', mechanisms=['edge_flip', 'laplace', 'denoised_laplace'],
                           stat_kinds=['xi'], repetitions=2)
        frames = run_qq_study(cfg, workers=1)
        for name in ('records', 'summary'):
            labels = frames[name].groupby('mechanism')['variance_source'].unique()
            assert labels['edge_flip'].tolist() == ['edge_flip_sigma_at_theta_hat']
            assert labels['laplace'].tolist() == ['mle_p1_at_theta_hat']
            assert labels['denoised_laplace'].tolist() == ['mle_p1_at_theta_hat']

    def test_truth_injection_gives_zero_statistics(self):
        cfg = small_config(kind='qq', mechanisms=['edge_flip'], inject_truth=True, repetitions=3)
        records = run_qq_study(cfg, workers=1)['records']
        np.testing.assert_array_equal(records['value'].to_numpy(), 0.0)

    def test_failures_are_recorded(self):
        cfg = small_config(kind='qq', mechanisms=['laplace'], repetitions=4)
        frames = run_qq_study(cfg, workers=1, options=SolverOptions(max_iterations=1))
        records = frames['records']
        assert records['value'].isna().all()
        assert (records['failure_reason'] != 'none').all()
        summary = frames['summary']
        assert (summary['failure_rate'] == 1.0).all()
        assert (summary['note'] == 'estimate did not exist').all()

    def test_quantile_pairs(self):
        frame = qq_quantile_pairs(np.arange(1, 100, dtype=float), points=3)
        np.testing.assert_allclose(frame['probability'], [0.25, 0.5, 0.75])
        assert frame['theoretical'].iloc[1] == pytest.approx(0.0)
        assert frame['empirical'].iloc[1] == pytest.approx(50.0)


class TestVarianceComparison:

    def test_columns_and_ordering(self):
        frame = run_variance_comparison(linear_parameters(20, 1.0), 2.0)
        assert list(frame.columns) == ['index', 'coordinate', 'mle', 'laplace', 'denoised_laplace', 'edge_flip']
        assert len(frame) == 39
        assert frame['coordinate'].iloc[0] == 'alpha_1' and frame['coordinate'].iloc[-1] == 'beta_19'
        assert (frame['edge_flip'] > frame['mle']).all()
        assert (frame['laplace'] > frame['mle']).all()
        assert (frame['denoised_laplace'] == frame['mle']).all()


class TestConsistency:

    def test_summary_columns(self):
        cfg = small_config(kind='consistency', n_values=[20, 40], repetitions=4, mechanisms=['edge_flip'])
        frame = run_consistency_study(cfg, workers=1)
        assert len(frame) == 2
        failures = frame[[c for c in frame.columns if c.startswith('failures_')]].sum(axis=1)
        np.testing.assert_allclose(frame['existence_frequency'] + failures / frame['repetitions'], 1.0)


class TestCampaignOutput:

    def test_writes_csv_and_manifest(self, tmp_path):
        cfg = small_config(repetitions=3)
        result = run_campaign(cfg, tmp_path, workers=1)
        assert result['success']
        table = pd.read_csv(tmp_path / 'distance_table.csv')
        assert len(table) == 3
        manifest = json.loads((tmp_path / 'manifest.json').read_text(encoding='utf-8'))
        assert manifest['base_seed'] == 7
        assert manifest['config_hash'] == cfg.config_hash()
        assert manifest['outputs'] == ['distance_table.csv']
        digest = hashlib.sha256((tmp_path / 'distance_table.csv').read_bytes()).hexdigest()
        assert manifest['output_sha256'] == {'distance_table.csv': digest}
        assert {'numpy', 'scipy'} <= set(manifest['libraries'])

    def test_output_is_reproducible(self, tmp_path):
        cfg = small_config(kind='variance', n_values=[10], L_spec=['zero', 'log_n'])
        run_campaign(cfg, tmp_path / 'a', workers=1)
        run_campaign(cfg, tmp_path / 'b', workers=1)
        first = (tmp_path / 'a' / 'variance_comparison.csv').read_bytes()
        assert first == (tmp_path / 'b' / 'variance_comparison.csv').read_bytes()


class TestRealData:

    def test_fixture_pipeline(self, fixture_edges, tmp_path):
        report = run_realdata(fixture_edges, ['2', 'logn_q'], repetitions=3, base_seed=11, workers=1)
        assert report.ingestion['nodes'] == 50
        assert report.ingestion['self_loops_dropped'] == 1
        assert report.preprocessing['zero_degree_removed'] == 3
        assert report.preprocessing['iterated_nodes'] == 44
        assert report.preprocessing['filter'] == 'single_pass'
        assert report.preprocessing['single_pass_nodes'] == report.preprocessing['analyzed_nodes'] == 44
        assert report.preprocessing['quantiles']['out'][0] > 5
        assert report.mle['success']
        assert len(report.records) == 2 * 3 * 3
        assert len(report.summary) == 2 * 3
        assert report.summary['failure_percent'].between(0, 100).all()

        result = write_realdata_report(report, tmp_path, {'edges': str(fixture_edges)}, 11)
        assert result['success']
        payload = json.loads((tmp_path / 'realdata_report.json').read_text(encoding='utf-8'))
        assert payload['preprocessing']['thresholds'] == [5, 5]

    def test_missing_dataset(self, tmp_path):
        with pytest.raises(DatasetMissingError):
            run_realdata(tmp_path / 'absent.txt', ['2'], repetitions=1, base_seed=1)


# ========== 完整规模验收 ==========

@pytest.mark.slow
def test_distance_table_columns(record_property):
    """拉普拉斯与边翻转列对照参考值；去噪列只要求不劣于参考值并与拉普拉斯列同量级"""
    cfg = SimConfig(n_values=[100, 500], epsilon_spec=['2'], L_spec=['sqrt_log_n'], repetitions=500,
                    mechanisms=['laplace', 'denoised_laplace', 'edge_flip'])
    table = run_distance_table(cfg).set_index(['n', 'mechanism'])['mean_distance']
    assert 4.7 <= table[(100, 'laplace')] <= 6.7
    assert 6.4 <= table[(500, 'laplace')] <= 8.4
    assert table[(100, 'edge_flip')] == pytest.approx(16.9, rel=0.3)
    assert table[(500, 'edge_flip')] == pytest.approx(64.3, rel=0.3)

    for n, reference in ((100, 11.0), (500, 21.1)):
        denoised = table[(n, 'denoised_laplace')]
        record_property(f'denoised_distance_n{n}', f'{denoised:.2f} (reference {reference})')
        assert denoised <= reference
        assert 0.7 * table[(n, 'laplace')] <= denoised <= 1.5 * table[(n, 'laplace')]


@pytest.mark.slow
def test_edge_flip_normality():
    cfg = SimConfig(n_values=[100], epsilon_spec=['2'], L_spec=['zero'], repetitions=1000,
                    mechanisms=['edge_flip'], kind='qq', pairs=[[0, 1]])
    summary = run_qq_study(cfg)['summary'].iloc[0]
    assert -0.1 <= summary['mean'] <= 0.1
    assert 0.85 <= summary['variance'] <= 1.15
    assert summary['ks_statistic'] < 0.06


@pytest.mark.slow
def test_consistency_direction():
    cfg = SimConfig(n_values=[100, 200], epsilon_spec=['2'], L_spec=['zero'], repetitions=100,
                    mechanisms=['edge_flip'], kind='consistency')
    frame = run_consistency_study(cfg).set_index('n')
    assert frame.loc[200, 'median_error_inf'] < frame.loc[100, 'median_error_inf']
    assert (frame['existence_frequency'] >= 0.99).all()


@pytest.mark.slow
def test_uc_irvine_pipeline():
    path = CONFIG.resolve_path('experiments.dataset_path', 'data/uci/CollegeMsg.txt')
    if not path.exists():
        pytest.skip(f'UC Irvine 数据集不存在: {path}')
    report = run_realdata(path, ['2'], repetitions=200, base_seed=20240101, mechanisms=['edge_flip'])
    assert report.ingestion['nodes'] == 1899
    assert report.ingestion['edges'] == 20296
    assert report.preprocessing['filter'] == 'single_pass'
    assert report.preprocessing['analyzed_nodes'] == 696
    quantiles = report.preprocessing['quantiles']
    assert quantiles['out'] == [3.0, 8.0, 14.0, 26.0, 164.0]
    assert quantiles['in'] == [4.0, 10.0, 16.0, 27.0, 121.0]
    row = report.summary.iloc[0]
    assert row['failure_percent'] == 0.0
    assert row['mean_alpha_distance'] == pytest.approx(4.64, rel=0.3)


def test_iterated_filter_option(fixture_edges):
    """iterate_filter 为真时分析反复剪枝后的子图，报告标记过滤方式"""
    report = run_realdata(fixture_edges, ['2'], repetitions=1, base_seed=5, mechanisms=['edge_flip'],
                          workers=1, iterate_filter=True)
    assert report.preprocessing['filter'] == 'iterated'
    assert report.preprocessing['analyzed_nodes'] == report.preprocessing['iterated_nodes'] == 44
