"""
Desk-scale acceptance runs on the reference profiles.

These take minutes per cell and are excluded from the default run; use
`pytest -m slow` to execute them.
"""
import numpy as np
import pytest

from src.config import DevelopmentConfig, default_settings
from src.harness import (
    ExperimentSpec,
    aggregation_jumps,
    find_spec,
    reference_matrix,
    run_matrix,
    same_dataset_specs
)


SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture(scope='module')
def desk_settings():
    """Development preset on the reference profiles over five seeds."""
    return default_settings(DevelopmentConfig()).with_seeds(SEEDS)


def _mean(matrix, approach, case, test):
    table = matrix.table
    row = table[(table['Approach'] == approach) & (table['Case'] == case) & (table['Test'] == test)]
    assert len(row) == 1
    return float(row['Test acc'].iloc[0])


@pytest.fixture(scope='module')
def independent_matrix(desk_settings):
    specs = [
        find_spec('Independent', 'DA'),
        find_spec('Independent', 'DR'),
        ExperimentSpec('SD', 'Independent', ('ca',), ('ca',)),
    ]
    return run_matrix(specs, desk_settings)


@pytest.mark.e2e
@pytest.mark.slow
class TestCrossNodeCollapse:
    """Test the independent-model generalization gap."""

    def test_ordering(self, independent_matrix):
        """Test that same-node beats cross-road beats cross-site accuracy."""
        sd = _mean(independent_matrix, 'Independent', 'SD', 'CA')
        dr = _mean(independent_matrix, 'Independent', 'DR', 'CA')
        da = _mean(independent_matrix, 'Independent', 'DA', 'CA')

        assert sd >= 0.90
        assert da <= 0.60
        assert sd > dr > da
        assert sd - da >= 0.25

    def test_rows_are_reliable(self, independent_matrix):
        """Test that five-seed rows are marked reliable."""
        assert independent_matrix.table['Reliable'].all()


@pytest.mark.e2e
@pytest.mark.slow
class TestFederatedRecovery:
    """Test recovery of cross-site accuracy by federated averaging."""

    @pytest.fixture(scope='class')
    def fl_matrix(self, desk_settings):
        return run_matrix([find_spec('FL', 'DA')], desk_settings)

    def test_global_model_on_every_node(self, fl_matrix, independent_matrix):
        """Test that the final global model does well on every node and beats the independent model."""
        for test in ('Red', 'CA', 'CB'):
            assert _mean(fl_matrix, 'FL - 3Agents', 'DA', test) >= 0.85
        assert (_mean(fl_matrix, 'FL - 3Agents', 'DA', 'CA')
                >= _mean(independent_matrix, 'Independent', 'DA', 'CA') + 0.20)

    def test_aggregation_improves_validation(self, fl_matrix):
        """Test that cross-node validation accuracy rises at aggregation events on average."""
        jumps = [aggregation_jumps(report.curves)['jump'] for report in fl_matrix.reports]
        assert np.mean(np.concatenate([j.to_numpy() for j in jumps])) > 0


@pytest.mark.e2e
@pytest.mark.slow
class TestMetaRecovery:
    """Test few-shot recovery from a meta-learned initialization."""

    @pytest.fixture(scope='class')
    def meta_matrix(self, desk_settings):
        return run_matrix([find_spec('Meta', 'DA')], desk_settings)

    def test_five_shot_accuracy(self, meta_matrix):
        """Test the target accuracy after five fine-tuning shots."""
        assert _mean(meta_matrix, 'Meta-learning', 'DA', 'CA') >= 0.85

    def test_more_shots_help(self, meta_matrix):
        """Test that five shots beat one shot on the few-shot curve."""
        sweep = np.concatenate([
            report.sweep.groupby('shots')['accuracy'].mean().reindex([1, 5]).to_numpy()[None, :]
            for report in meta_matrix.reports
        ])
        one_shot, five_shot = sweep.mean(axis=0)
        assert five_shot >= one_shot + 0.05


@pytest.mark.e2e
@pytest.mark.slow
class TestFullMatrix:
    """Test the complete comparison table."""

    def test_no_leaks_and_deterministic(self, desk_settings, tmp_path):
        """Test that the full matrix reads no test split while training and repeats exactly."""
        specs = reference_matrix() + same_dataset_specs()
        settings = desk_settings.with_seeds((0,))
        first = run_matrix(specs, settings, run_dir=tmp_path / 'first')
        second = run_matrix(specs, settings)

        for report in first.reports:
            leaked = {key: n for key, n in report.reads.items()
                      if '/test|' in key and key.split('|')[1] in ('train', 'source-train')}
            assert not leaked, report.spec.slug
        assert first.table['Test acc'].tolist() == second.table['Test acc'].tolist()
        assert len(first.table) == 15
