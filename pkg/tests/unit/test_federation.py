"""
Tests for federated averaging: aggregation, nodes and the round coordinator.
"""
import numpy as np
import pytest

from src.analytics import AGGREGATION_EVENT, EPOCH_EVENT
from src.federation import (
    DASNode,
    FederationConfig,
    FederationConfigError,
    NodeConstraintError,
    aggregate,
    init_federation,
    local_round,
    round_seed,
    run_federation,
    write_federation_outputs
)
from src.pipeline import AccessAudit, split
from src.srnet import DescriptorMismatchError, TrainConfig, desk_preset, fit, init_params
from tests.utils.test_helpers import fsum_mean


@pytest.fixture
def node_splits(red_samples, ca_samples):
    return [split(red_samples, 0.75, seed=0), split(ca_samples, 0.75, seed=0)]


@pytest.fixture
def node_profiles(red_profile, ca_profile):
    return [red_profile, ca_profile]


@pytest.fixture
def fed_config():
    return FederationConfig(rounds=2, local_epochs=2, train=TrainConfig(batch_size=8))


@pytest.mark.unit
class TestAggregate:
    """Test model averaging."""

    def test_matches_extended_precision_mean(self, tiny_arch):
        """Test that the average equals an fsum mean within 1e-12."""
        models = [init_params(tiny_arch, seed=s) for s in (1, 2, 3)]
        expected = fsum_mean([m.flatten() for m in models])

        assert np.max(np.abs(aggregate(models).flatten() - expected)) <= 1e-12

    def test_single_model_is_identity(self, tiny_params):
        """Test that averaging one model returns it unchanged."""
        assert aggregate([tiny_params]).equals(tiny_params)

    def test_identical_models_are_exact(self, tiny_params):
        """Test that averaging copies of one model reproduces it bit for bit."""
        assert aggregate([tiny_params.copy() for _ in range(3)]).equals(tiny_params)

    def test_result_stays_within_input_range(self, tiny_arch):
        """Test that every averaged value lies between the inputs' extremes."""
        models = [init_params(tiny_arch, seed=s) for s in (4, 5)]
        vectors = np.stack([m.flatten() for m in models])
        mean = aggregate(models).flatten()
        assert np.all(mean >= vectors.min(axis=0))
        assert np.all(mean <= vectors.max(axis=0))

    def test_weights(self, tiny_arch):
        """Test that a one-hot weight vector selects that model."""
        models = [init_params(tiny_arch, seed=s) for s in (1, 2)]
        assert aggregate(models, weights=[0.0, 1.0]).equals(models[1])

    @pytest.mark.parametrize('weights', [[0.5, 0.6], [1.5, -0.5], [1.0]])
    def test_invalid_weights(self, tiny_arch, weights):
        """Test that weights must be non-negative, one per model and sum to 1."""
        models = [init_params(tiny_arch, seed=s) for s in (1, 2)]
        with pytest.raises(FederationConfigError):
            aggregate(models, weights=weights)

    def test_empty(self):
        """Test that there must be something to aggregate."""
        with pytest.raises(FederationConfigError):
            aggregate([])

    def test_mixed_architectures(self, tiny_params):
        """Test that models of different architectures cannot be averaged."""
        with pytest.raises(DescriptorMismatchError):
            aggregate([tiny_params, init_params(desk_preset((32, 128)), seed=0)])


@pytest.mark.unit
class TestInitFederation:
    """Test federation setup."""

    def test_every_node_starts_from_the_global_model(self, node_profiles, node_splits, tiny_arch):
        """Test that node models start as copies of the global model."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=3)

        assert state.round == 0
        assert state.node_ids == ['ca', 'red']
        assert state.global_params.equals(init_params(tiny_arch, seed=3))
        for params in state.node_params.values():
            assert params.equals(state.global_params)

    def test_needs_two_nodes(self, node_profiles, node_splits, tiny_arch):
        """Test that a single node is not a federation."""
        with pytest.raises(FederationConfigError, match='at least 2'):
            init_federation(node_profiles[:1], node_splits[:1], tiny_arch, seed=0)

    def test_mismatched_inputs(self, node_profiles, node_splits, tiny_arch):
        """Test that every profile needs a dataset."""
        with pytest.raises(FederationConfigError):
            init_federation(node_profiles, node_splits[:1], tiny_arch, seed=0)

    def test_duplicate_node_ids(self, red_profile, node_splits, tiny_arch):
        """Test that node ids must be unique."""
        with pytest.raises(FederationConfigError, match='unique'):
            init_federation([red_profile, red_profile], node_splits, tiny_arch, seed=0)

    def test_too_few_node_samples(self, node_profiles, red_samples, ca_samples, tiny_arch):
        """Test that a node with fewer than five training samples is rejected."""
        small = split(ca_samples[:6], 0.5, seed=0)
        with pytest.raises(NodeConstraintError, match='ca'):
            init_federation(node_profiles, [split(red_samples, 0.75, seed=0), small], tiny_arch, seed=0)


@pytest.mark.unit
class TestRounds:
    """Test local rounds and the federation loop."""

    def test_round_seed(self):
        """Test that round seeds are reproducible and differ between rounds."""
        assert round_seed(0, 1) == round_seed(0, 1)
        assert round_seed(0, 1) != round_seed(0, 2)
        assert round_seed(0, 1) != round_seed(1, 1)

    def test_local_round_restarts_from_global(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that repeated local rounds without aggregation give the same node model."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        first = local_round(state, 'red', fed_config).params
        second = local_round(state, 'red', fed_config).params

        assert first.equals(second)
        assert state.node_params['red'].equals(second)
        assert state.node_params['ca'].equals(state.global_params)

    def test_unknown_node(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that a round for an unknown node is rejected."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        with pytest.raises(FederationConfigError):
            local_round(state, 'cb', fed_config)

    def test_metric_rows(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test the per-epoch and per-aggregation rows of a two-round run."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        result = run_federation(state, fed_config)
        frame = result.metrics.to_frame(include_event=True)

        epochs = frame[frame['event'] == EPOCH_EVENT]
        aggregations = frame[frame['event'] == AGGREGATION_EVENT]
        assert len(epochs) == 2 * 2 * 2 * 3
        assert sorted(epochs['epoch'].unique()) == [1, 2, 3, 4]
        assert len(aggregations) == 2 * 2
        assert sorted(aggregations['epoch'].unique()) == [2, 4]
        assert set(aggregations['node']) == {'global'}
        assert set(aggregations['split']) == {'red/test', 'ca/test'}

    def test_state_after_rounds(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that every node holds the new global model after each aggregation."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        result = run_federation(state, fed_config)

        assert state.round == 2
        assert state.participation_history == [('ca', 'red'), ('ca', 'red')]
        for params in state.node_params.values():
            assert params.equals(state.global_params)
        assert len(result.digests) == 2 * 3
        assert not state.global_params.equals(init_params(tiny_arch, seed=1))

    def test_aggregation_of_local_models(self, node_profiles, node_splits, tiny_arch):
        """Test that one round's global model is the average of the nodes' local models."""
        config = FederationConfig(rounds=1, local_epochs=1, train=TrainConfig(batch_size=8), evaluate_epochs=False)
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=2)
        start = state.global_params.copy()
        run_federation(state, config)

        local_config = TrainConfig(batch_size=8, epochs=1, seed=round_seed(2, 1))
        expected = aggregate([fit(start, s.train, local_config).params for s in (node_splits[1], node_splits[0])])
        assert state.global_params.equals(expected)

    def test_zero_learning_rate_keeps_global_model(self, node_profiles, node_splits, tiny_arch):
        """Test that a federation at lr = 0 never moves the global model."""
        config = FederationConfig(rounds=2, local_epochs=1, train=TrainConfig(learning_rate=0.0, batch_size=8))
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=5)
        run_federation(state, config)
        assert state.global_params.equals(init_params(tiny_arch, seed=5))

    def test_zero_local_epochs_leave_model_unchanged(self, node_profiles, node_splits, tiny_arch):
        """Test that a local round with no epochs returns the global model."""
        config = FederationConfig(rounds=1, local_epochs=0, train=TrainConfig(batch_size=8), evaluate_epochs=False)
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=3)
        update = local_round(state, 'red', config)

        assert update.params.equals(state.global_params)
        run_federation(state, config)
        assert state.global_params.equals(init_params(tiny_arch, seed=3))

    def test_identical_datasets_give_identical_updates(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that two nodes holding the same data produce the same local model."""
        shared = node_splits[0]
        state = init_federation(node_profiles, [shared, shared], tiny_arch, seed=4)

        red = local_round(state, 'red', fed_config).params
        ca = local_round(state, 'ca', fed_config).params
        assert red.equals(ca)
        assert not red.equals(state.global_params)

    def test_shared_dataset_matches_local_training(self, node_profiles, node_splits, tiny_arch):
        """Test that nodes sharing one dataset follow the single-node training trajectory."""
        shared = node_splits[0]
        train = TrainConfig(batch_size=8)
        config = FederationConfig(rounds=3, local_epochs=2, train=train, evaluate_epochs=False)
        state = init_federation(node_profiles, [shared, shared], tiny_arch, seed=6)
        expected = state.global_params.copy()
        result = run_federation(state, config)

        for round_index in range(1, 4):
            local_config = TrainConfig(batch_size=8, epochs=2, seed=round_seed(6, round_index))
            expected = fit(expected, shared.train, local_config).params
            digests = {node: digest for r, node, digest in result.digests if r == round_index}
            assert digests['global'] == digests['red'] == digests['ca']
        assert state.global_params.equals(expected)

    def test_run_summaries(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that every round records one local phase timing and one accuracy per node."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        result = run_federation(state, fed_config)

        assert result.metrics.get_timing_metrics('local_round')['count'] == 2
        for node_id in ('red', 'ca'):
            summary = result.metrics.get_accuracy_summary(f"{node_id}/test", event=AGGREGATION_EVENT)
            assert summary['count'] == 2
            assert 0.0 <= summary['min'] <= summary['mean'] <= summary['max'] <= 1.0

    def test_threaded_rounds_match_serial(self, node_profiles, node_splits, tiny_arch):
        """Test that parallel local training gives the same global model as serial training."""
        serial = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        threaded = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        config = FederationConfig(rounds=1, local_epochs=1, train=TrainConfig(batch_size=8), evaluate_epochs=False)
        run_federation(serial, config)
        run_federation(threaded, FederationConfig(rounds=1, local_epochs=1, train=TrainConfig(batch_size=8),
                                                  evaluate_epochs=False, workers=2))
        assert serial.global_params.equals(threaded.global_params)

    def test_partial_participation(self, node_profiles, node_splits, tiny_arch):
        """Test that an absent node contributes nothing to the round."""
        config = FederationConfig(rounds=1, local_epochs=1, train=TrainConfig(batch_size=8),
                                  participation=((False, True),), evaluate_epochs=False)
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        start = state.global_params.copy()
        run_federation(state, config)

        local_config = TrainConfig(batch_size=8, epochs=1, seed=round_seed(1, 1))
        assert state.participation_history == [('red',)]
        assert state.global_params.equals(fit(start, node_splits[0].train, local_config).params)

    def test_weighted_rounds(self, node_profiles, node_splits, tiny_arch):
        """Test that a node with zero weight is ignored by the average."""
        config = FederationConfig(rounds=1, local_epochs=1, train=TrainConfig(batch_size=8),
                                  weights={'red': 1.0, 'ca': 0.0}, evaluate_epochs=False)
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        start = state.global_params.copy()
        run_federation(state, config)

        local_config = TrainConfig(batch_size=8, epochs=1, seed=round_seed(1, 1))
        assert state.global_params.equals(fit(start, node_splits[0].train, local_config).params)

    def test_missing_weight(self, node_profiles, node_splits, tiny_arch):
        """Test that every participant needs a weight."""
        config = FederationConfig(rounds=1, local_epochs=1, weights={'red': 1.0}, evaluate_epochs=False)
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        with pytest.raises(FederationConfigError, match='ca'):
            run_federation(state, config)

    def test_test_splits_untouched_while_training(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that test data is read only in the evaluation phase."""
        audit = AccessAudit()
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1, audit=audit)
        run_federation(state, fed_config, audit=audit)

        assert audit.reads('red/test', 'train') == 0
        assert audit.reads('ca/test', 'train') == 0
        assert audit.reads('red/train', 'train') > 0
        assert audit.reads('ca/test', 'evaluate') > 0

    @pytest.mark.parametrize('kwargs', [{'rounds': -1}, {'local_epochs': -1}, {'workers': 0}])
    def test_invalid_config(self, kwargs):
        """Test that negative schedules and zero workers are rejected."""
        with pytest.raises(FederationConfigError):
            FederationConfig(**kwargs)

    def test_zero_rounds_rejected(self, node_profiles, node_splits, tiny_arch, fed_config):
        """Test that a run needs at least one round."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        with pytest.raises(FederationConfigError):
            run_federation(state, fed_config, rounds=0)


@pytest.mark.unit
class TestNode:
    """Test a single DAS node."""

    def test_evaluate_split(self, node_splits, tiny_params):
        """Test that a node scores its own splits and nothing else."""
        node = DASNode('red', node_splits[0].train, node_splits[0].test)

        assert node.evaluate(tiny_params).count == len(node_splits[0].test)
        assert node.evaluate(tiny_params, 'train').count == len(node_splits[0].train)
        with pytest.raises(ValueError):
            node.evaluate(tiny_params, 'all')

    def test_update_carries_no_samples(self, node_splits, tiny_params):
        """Test that an upload holds parameters and counts only."""
        node = DASNode('red', node_splits[0].train, node_splits[0].test)
        update = node.local_update(tiny_params, TrainConfig(epochs=1, batch_size=8))

        assert update.node_id == 'red'
        assert update.n_samples == node.n_train
        assert len(update.history) == 1
        assert update.snapshots == []


@pytest.mark.unit
class TestFederationOutputs:
    """Test federation run outputs."""

    def test_outputs_written(self, node_profiles, node_splits, tiny_arch, fed_config, tmp_path):
        """Test that metrics, the global checkpoint and the manifest are written."""
        state = init_federation(node_profiles, node_splits, tiny_arch, seed=1)
        result = run_federation(state, fed_config)
        manifest = write_federation_outputs(tmp_path, result, fed_config, config_digest='abc')

        text = manifest.read_text(encoding='utf-8')
        assert 'config_digest abc' in text
        assert 'rounds 2' in text
        assert 'nodes ca red' in text
        assert (tmp_path / 'global.ckpt').exists()
        header = (tmp_path / 'metrics.csv').read_text(encoding='utf-8').splitlines()[0]
        assert header == 'round,epoch,node,split,accuracy,loss,event'
