"""
Unit tests for experiment specs, table aggregation, curves and isolation checks.
"""
from dataclasses import replace

import pandas as pd
import pytest

from src.analytics import AGGREGATION_EVENT, EPOCH_EVENT
from src.harness import (
    ALL_NODES,
    Case,
    ExperimentConfigError,
    ExperimentReport,
    ExperimentSpec,
    HarnessError,
    Strategy,
    aggregation_jumps,
    check_isolation,
    emit_curves,
    find_spec,
    node_splits,
    reference_matrix,
    same_dataset_specs,
    summarize,
    sweep_seeds
)
from src.harness.runner import _tasks
from src.harness.spec import CURVE_COLUMNS
from src.pipeline import AccessAudit, LeakageError


def _report(spec, seed, accuracies, curves=None, sweep=None):
    return ExperimentReport(
        spec=spec,
        seed=seed,
        accuracies=accuracies,
        curves=curves if curves is not None else pd.DataFrame(columns=CURVE_COLUMNS),
        sweep=sweep,
        config_digest='d' * 64
    )


@pytest.mark.unit
class TestExperimentSpec:
    """Test cell validation and labels."""

    def test_values_are_coerced(self):
        """Test that string case and strategy values and lists are normalized."""
        spec = ExperimentSpec('DA', 'Independent', ['red'], ['ca'], seeds=[1, 2])

        assert spec.case is Case.DA
        assert spec.strategy is Strategy.INDEPENDENT
        assert spec.train_nodes == ('red',)
        assert spec.seeds == (1, 2)

    @pytest.mark.parametrize('case, strategy, train, test', [
        ('SD', 'Universal', ('red',), ('red',)),
        ('SD', 'Independent', ('red',), ('ca',)),
        ('DA', 'Independent', ('ca',), ('cb',)),
        ('DR', 'Independent', ('red',), ('ca',)),
        ('DR', 'FL', ('ca', 'cb', 'red'), ('ca',)),
        ('DA', 'Meta', ('red',), ('red', 'ca')),
        ('DA', 'Meta', ('red', 'cb'), ('ca',)),
        ('DA', 'FL', ('red',), ('red',)),
        ('DA', 'FL', ('red', 'ca'), ('cb',)),
        ('DA', 'Independent', ('red',), ('blue',)),
        ('DA', 'Independent', (), ('ca',)),
    ])
    def test_invalid_cells(self, case, strategy, train, test):
        """Test that cells breaking the case or strategy rules are rejected."""
        with pytest.raises(ExperimentConfigError):
            ExperimentSpec(case, strategy, train, test)

    def test_labels(self):
        """Test approach names, training labels and slugs."""
        fl = ExperimentSpec(Case.DA, Strategy.FL, ALL_NODES, ALL_NODES)
        dr_fl = ExperimentSpec(Case.DR, Strategy.FL, ('ca', 'cb'), ('ca', 'cb'))
        meta = ExperimentSpec(Case.DA, Strategy.META, ('red',), ('ca',))

        assert fl.approach == 'FL - 3Agents'
        assert fl.training_label == 'All'
        assert fl.slug == 'fl-da-red-ca-cb'
        assert dr_fl.approach == 'FL - 2Agents'
        assert dr_fl.training_label == 'CA+CB'
        assert meta.approach == 'Meta-learning'
        assert meta.training_label == 'Red'
        assert meta.nodes == ('red', 'ca')

    def test_reference_matrix_rows(self):
        """Test that the reference matrix yields the twelve distinct table rows."""
        keys = [key for spec in reference_matrix() for key in spec.table_keys()]

        assert len(reference_matrix()) == 8
        assert len(keys) == 12
        assert len(set(keys)) == 12
        assert ('Universal', 'DA', 'All', 'Red') in keys
        assert ('Meta-learning', 'DR', 'CB', 'CA') in keys

    def test_same_dataset_specs(self):
        """Test one independent SD cell per node."""
        specs = same_dataset_specs()
        assert [spec.train_nodes for spec in specs] == [('red',), ('ca',), ('cb',)]
        assert all(spec.case == Case.SD for spec in specs)

    def test_find_spec(self):
        """Test looking up cells by strategy and case."""
        assert find_spec('FL', 'DR').train_nodes == ('ca', 'cb')
        assert find_spec('Independent', 'SD').train_nodes == ('red',)
        with pytest.raises(ExperimentConfigError, match='No Universal cell'):
            find_spec('Universal', 'SD')


@pytest.mark.unit
class TestSummarize:
    """Test table aggregation over seeds."""

    def test_mean_and_population_std(self):
        """Test mean, ddof=0 spread, seed count and reliability flag."""
        spec = ExperimentSpec(Case.DA, Strategy.INDEPENDENT, ('red',), ('ca',))
        table = summarize([_report(spec, 0, {'ca': 0.6}), _report(spec, 1, {'ca': 0.8})], 'abc')

        assert len(table) == 1
        row = table.iloc[0]
        assert (row['Approach'], row['Case'], row['Training'], row['Test']) == ('Independent', 'DA', 'Red', 'CA')
        assert row['Test acc'] == pytest.approx(0.7)
        assert row['Test acc std'] == pytest.approx(0.1)
        assert row['Seeds'] == 2
        assert not row['Reliable']
        assert row['Config digest'] == 'abc'

    def test_rows_in_first_seen_order(self):
        """Test that rows follow cell and test-node order."""
        universal = ExperimentSpec(Case.DA, Strategy.UNIVERSAL, ALL_NODES, ('red', 'ca'))
        reports = [_report(universal, seed, {'red': 0.9, 'ca': 0.5}) for seed in range(5)]
        table = summarize(reports, 'abc')

        assert list(table['Test']) == ['Red', 'CA']
        assert list(table['Test acc std']) == [0.0, 0.0]
        assert table['Reliable'].all()

    def test_empty(self):
        """Test that no reports give an empty table with the full header."""
        table = summarize([], 'abc')
        assert table.empty
        assert 'Test acc std' in table.columns


@pytest.mark.unit
class TestMatrixTasks:
    """Test matrix expansion checks."""

    def test_expands_seeds(self, testing_settings):
        """Test that every spec runs on its own seeds or the experiment's."""
        settings = testing_settings.with_seeds([3, 4])
        pinned = ExperimentSpec(Case.DR, Strategy.INDEPENDENT, ('cb',), ('ca',), seeds=(9,))
        tasks = _tasks([find_spec('Independent', 'DA'), pinned], settings, None)

        assert [(spec.slug, seed) for spec, _, seed, _ in tasks] == [
            ('independent-da-red', 3), ('independent-da-red', 4), ('independent-dr-cb', 9)
        ]

    def test_empty_matrix(self, testing_settings):
        """Test that a matrix needs at least one spec."""
        with pytest.raises(ExperimentConfigError, match='at least one spec'):
            _tasks([], testing_settings, None)

    def test_duplicate_cells(self, testing_settings):
        """Test that a cell may appear only once."""
        spec = find_spec('FL', 'DA')
        with pytest.raises(ExperimentConfigError, match='only once'):
            _tasks([spec, spec], testing_settings, None)

    def test_no_seeds(self, testing_settings):
        """Test that an empty seed list is rejected."""
        settings = replace(testing_settings, harness=replace(testing_settings.harness, seeds=()))
        with pytest.raises(ExperimentConfigError, match='No seeds'):
            _tasks([find_spec('FL', 'DR')], settings, None)


@pytest.mark.unit
class TestNodeSplits:
    """Test harness dataset construction."""

    def test_splits_follow_settings(self, testing_settings):
        """Test that every node is split with its configured ratio."""
        splits = node_splits(('red', 'ca'), testing_settings, seed=0)

        assert len(splits['red'].train) == 30
        assert len(splits['red'].test) == 10
        assert len(splits['ca'].train) == 18
        assert splits['ca'].train[0].window.shape == (16, 128)

    def test_same_seed_same_data(self, testing_settings):
        """Test that node data depends only on the profile and run seed."""
        first = node_splits(('cb',), testing_settings, seed=4)['cb']
        second = node_splits(('cb',), testing_settings, seed=4)['cb']

        assert first.train_indices == second.train_indices
        assert (first.train[0].window.data == second.train[0].window.data).all()

    def test_missing_ratio(self, testing_settings):
        """Test that a node without a split ratio is a configuration error."""
        pipeline = replace(testing_settings.pipeline, split_ratios={'red': 0.75})
        settings = replace(testing_settings, pipeline=pipeline)
        with pytest.raises(ExperimentConfigError, match='split ratio'):
            node_splits(('ca',), settings, seed=0)


@pytest.mark.unit
class TestCurves:
    """Test curve files and aggregation jumps."""

    def test_requested_case_without_series(self, tmp_path):
        """Test that a case without reports still gets header-only files."""
        spec = ExperimentSpec(Case.DA, Strategy.INDEPENDENT, ('red',), ('ca',))
        curves = pd.DataFrame(
            [(0, 1, 'train', 0.7, 0.5, EPOCH_EVENT), (0, 1, 'ca/test', 0.69, 0.55, EPOCH_EVENT)],
            columns=CURVE_COLUMNS
        )
        written = emit_curves([_report(spec, 0, {'ca': 0.55}, curves=curves)], tmp_path, cases=['DA', 'DR'])

        assert sorted(path.name for path in written) == sorted([
            'loss_da.csv', 'accuracy_da.csv', 'few_shot_da.csv',
            'loss_dr.csv', 'accuracy_dr.csv', 'few_shot_dr.csv'
        ])
        assert (tmp_path / 'loss_dr.csv').read_text().strip() == 'approach,seed,epoch,split,loss,event'
        assert (tmp_path / 'few_shot_dr.csv').read_text().strip() == 'approach,target,seed,shots,accuracy'

        loss = pd.read_csv(tmp_path / 'loss_da.csv')
        assert list(loss['approach']) == ['Independent', 'Independent']
        assert list(loss['split']) == ['train', 'ca/test']

    def test_sweep_rows(self, tmp_path):
        """Test that few-shot rows land in the case's few-shot file."""
        spec = ExperimentSpec(Case.DR, Strategy.META, ('cb',), ('ca',))
        sweep = pd.DataFrame([('ca', 11, 1, 0.5), ('ca', 11, 2, 0.75)],
                             columns=['target', 'seed', 'shots', 'accuracy'])
        emit_curves([_report(spec, 0, {'ca': 0.75}, sweep=sweep)], tmp_path)

        few_shot = pd.read_csv(tmp_path / 'few_shot_dr.csv')
        assert list(few_shot['shots']) == [1, 2]
        assert set(few_shot['approach']) == {'Meta-learning'}

    def test_aggregation_jumps(self):
        """Test the accuracy change at aggregation events on validation splits."""
        curves = pd.DataFrame([
            (0, 2, 'train', 0.5, 0.6, EPOCH_EVENT),
            (0, 2, 'ca/test', 0.6, 0.5, EPOCH_EVENT),
            (0, 2, 'ca/test', 0.4, 0.7, AGGREGATION_EVENT),
            (0, 4, 'ca/test', 0.5, 0.6, EPOCH_EVENT),
            (0, 4, 'ca/test', 0.3, 0.9, AGGREGATION_EVENT),
        ], columns=CURVE_COLUMNS)

        jumps = aggregation_jumps(curves)

        assert list(jumps['epoch']) == [2, 4]
        assert jumps['jump'].tolist() == pytest.approx([0.2, 0.3])


@pytest.mark.unit
class TestIsolation:
    """Test leakage checks and seed derivation."""

    def test_clean_run_passes(self):
        """Test that reads in allowed phases pass."""
        audit = AccessAudit()
        with audit.phase('evaluate'):
            audit.record('ca/test')
        with audit.phase('train'):
            audit.record('red/train')
        check_isolation(find_spec('Independent', 'DA'), audit)

    def test_test_split_read_while_training(self):
        """Test that a test read during training is a leak."""
        audit = AccessAudit()
        with audit.phase('train'):
            audit.record('ca/test')
        with pytest.raises(LeakageError):
            check_isolation(find_spec('Independent', 'DA'), audit)

    def test_target_train_read_during_meta_training(self):
        """Test that a Meta target's train split must stay unread while training on the source."""
        spec = find_spec('Meta', 'DA')
        audit = AccessAudit()
        audit.record('ca/train')
        check_isolation(spec, audit)

        with audit.phase('source-train'):
            audit.record('ca/train')
        with pytest.raises(LeakageError):
            check_isolation(spec, audit)

    def test_sweep_seeds(self):
        """Test that fine-tuning seeds depend only on the run seed."""
        assert sweep_seeds(3, 5) == sweep_seeds(3, 5)
        assert len(set(sweep_seeds(3, 5))) == 5
        assert sweep_seeds(3, 5) != sweep_seeds(4, 5)
        assert sweep_seeds(3, 5)[:2] == sweep_seeds(3, 2)


@pytest.mark.unit
class TestHarnessError:
    """Test error payloads."""

    def test_to_dict(self):
        """Test the JSON error payload."""
        error = ExperimentConfigError('bad seeds', field='seeds')
        assert error.to_dict() == {'error': 'ExperimentConfigError', 'message': 'bad seeds', 'field': 'seeds'}
        assert str(error) == 'bad seeds'

    def test_plain_error(self):
        """Test that the base error carries only message and type."""
        assert HarnessError('boom').to_dict() == {'error': 'HarnessError', 'message': 'boom'}
