"""
Integration tests for cell and matrix runs on the testing preset.
"""
import json

import pandas as pd
import pytest

from src.harness import ExperimentSpec, find_spec, run_case, run_matrix
from src.harness.runner import TABLE_COLUMNS
from src.meta import load_meta_checkpoint
from src.srnet import load_checkpoint


@pytest.mark.integration
class TestRunCase:
    """Test single-cell runs of each strategy."""

    @pytest.mark.parametrize('strategy, case', [
        ('Independent', 'DR'),
        ('Universal', 'DR'),
        ('FL', 'DR'),
        ('Meta', 'DR'),
    ])
    def test_strategy_reports(self, testing_settings, strategy, case):
        """Test that every strategy reports an accuracy per test node and no leaked reads."""
        spec = find_spec(strategy, case)
        report = run_case(spec, testing_settings, seed=0)

        assert set(report.accuracies) == set(spec.test_nodes)
        assert all(0.0 <= acc <= 1.0 for acc in report.accuracies.values())
        assert report.config_digest == testing_settings.digest
        assert not any(key.endswith('/test|train') or key.endswith('/test|source-train') for key in report.reads)
        assert report.peak_rss_mb > 0

    def test_independent_curves(self, testing_settings):
        """Test that independent curves hold one train row and one row per test node per epoch."""
        report = run_case(find_spec('Independent', 'DA'), testing_settings, seed=0)

        assert list(report.curves['epoch'].unique()) == [1, 2]
        assert set(report.curves['split']) == {'train', 'ca/test'}
        assert report.sweep is None

    def test_fl_curves_mark_aggregations(self, testing_settings):
        """Test that FL curves carry one aggregation row per node test split per round."""
        report = run_case(find_spec('FL', 'DR'), testing_settings, seed=0)
        aggregations = report.curves[report.curves['event'] == 'aggregation']

        assert sorted(aggregations['epoch'].unique()) == [2, 4]
        assert len(aggregations) == 4

    def test_meta_reports_at_shot_count(self, testing_settings):
        """Test that the Meta accuracy is the sweep mean at the reported shot count."""
        report = run_case(find_spec('Meta', 'DR'), testing_settings, seed=0)
        at_shots = report.sweep[report.sweep['shots'] == testing_settings.harness.shots]

        assert report.accuracies['ca'] == pytest.approx(at_shots['accuracy'].mean())
        assert len(at_shots) == testing_settings.harness.sweep_seeds

    def test_outputs_in_case_directory(self, testing_settings, tmp_path):
        """Test that a run writes its checkpoint and curves to its own directory."""
        spec = find_spec('Meta', 'DR')
        report = run_case(spec, testing_settings, seed=3, run_dir=tmp_path)
        out = tmp_path / 'cases' / spec.slug / 'seed-3'

        params, sidecar = load_meta_checkpoint(out / 'model.ckpt')
        assert params.arch == testing_settings.arch
        assert sidecar['seed'] == 3
        assert sidecar['source'] == 'cb'
        assert sidecar['iterations_completed'] == testing_settings.meta.iterations
        assert sidecar['checkpoint_sha256'] == report.checkpoint_digest
        assert len(report.checkpoint_digest) == 64
        assert (out / 'curves.csv').exists()
        assert (out / 'sweep.csv').exists()


@pytest.mark.integration
class TestRunMatrix:
    """Test matrix aggregation, determinism and outputs."""

    def test_deterministic(self, testing_settings):
        """Test that the same settings and seeds give identical tables and curves."""
        specs = [find_spec('Independent', 'DR'), find_spec('FL', 'DR')]
        first = run_matrix(specs, testing_settings.with_seeds([0, 1]))
        second = run_matrix(specs, testing_settings.with_seeds([0, 1]))

        pd.testing.assert_frame_equal(first.table, second.table)
        for a, b in zip(first.reports, second.reports):
            pd.testing.assert_frame_equal(a.curves, b.curves)

    def test_processes_match_serial(self, testing_settings):
        """Test that worker processes reproduce the serial run."""
        specs = [find_spec('Independent', 'DR')]
        settings = testing_settings.with_seeds([0, 1])
        serial = run_matrix(specs, settings, workers=1)
        parallel = run_matrix(specs, settings, workers=2)

        pd.testing.assert_frame_equal(serial.table, parallel.table)

    def test_table_layout(self, testing_settings):
        """Test the aggregated table over two seeds."""
        matrix = run_matrix([find_spec('Universal', 'DA')], testing_settings.with_seeds([0, 1]))

        assert list(matrix.table.columns) == TABLE_COLUMNS
        assert list(matrix.table['Test']) == ['Red', 'CA']
        assert list(matrix.table['Seeds']) == [2, 2]
        assert not matrix.table['Reliable'].any()
        assert len(matrix.runs_frame()) == 4

    def test_run_directory(self, testing_settings, tmp_path):
        """Test the files and manifest of a matrix run."""
        spec = ExperimentSpec('SD', 'Independent', ('ca',), ('ca',))
        matrix = run_matrix([spec], testing_settings, run_dir=tmp_path)

        for name in ('table.csv', 'runs.csv', 'resources.csv', 'config.json', 'manifest.txt'):
            assert (tmp_path / name).exists()
        assert 'runtime' not in (tmp_path / 'table.csv').read_text()
        assert json.loads((tmp_path / 'config.json').read_text())['env'] == 'testing'

        manifest = (tmp_path / 'manifest.txt').read_text().splitlines()
        assert manifest[0] == 'experiment manifest'
        assert f"config_digest {matrix.config_digest}" in manifest
        assert 'cell independent-sd-ca seeds 0' in manifest
        checkpoint_lines = [line for line in manifest if line.startswith('checkpoint ')]
        assert len(checkpoint_lines) == 1
        assert checkpoint_lines[0].endswith(f"sha256:{matrix.reports[0].checkpoint_digest}")

        params = load_checkpoint(tmp_path / 'cases' / spec.slug / 'seed-0' / 'model.ckpt')
        assert params.arch == testing_settings.arch
