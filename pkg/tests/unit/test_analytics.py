"""
Unit tests for the metrics collector.
"""
from concurrent.futures import ThreadPoolExecutor

import pytest

from src.analytics import (
    AGGREGATION_EVENT,
    EPOCH_EVENT,
    METRIC_COLUMNS,
    InvalidAccuracyError,
    MetricRow,
    MetricsCollector,
    MetricsError,
    UnknownEventError
)


@pytest.fixture
def collector():
    """Collector holding two epoch rows on each of two nodes plus one aggregation row."""
    metrics = MetricsCollector()
    metrics.record(1, 1, 'red', 'train', 0.50, 0.70)
    metrics.record(1, 1, 'red', 'test', 0.60, 0.65)
    metrics.record(1, 1, 'ca', 'train', 0.40, 0.72)
    metrics.record(1, 1, 'ca', 'test', 0.80, 0.55)
    metrics.record(1, 1, 'global', 'test', 0.70, 0.60, event=AGGREGATION_EVENT)
    return metrics


@pytest.mark.unit
class TestMetricsCollector:
    """Test cases for MetricsCollector."""

    def test_record_keeps_order(self, collector):
        """Test that rows come back in recording order."""
        rows = collector.rows()

        assert len(rows) == 5
        assert rows[0] == MetricRow(1, 1, 'red', 'train', 0.5, 0.7, EPOCH_EVENT)
        assert rows[-1].event == AGGREGATION_EVENT

    @pytest.mark.parametrize('accuracy', [-0.01, 1.01])
    def test_record_rejects_accuracy_out_of_range(self, accuracy):
        """Test that accuracies outside [0, 1] are rejected."""
        with pytest.raises(InvalidAccuracyError, match='Accuracy') as excinfo:
            MetricsCollector().record(0, 0, 'red', 'test', accuracy, 0.5)
        assert excinfo.value.accuracy == accuracy
        assert isinstance(excinfo.value, MetricsError)

    def test_record_rejects_unknown_event(self):
        """Test that an unknown event tag is rejected."""
        with pytest.raises(UnknownEventError, match='Unknown event'):
            MetricsCollector().record(0, 0, 'red', 'test', 0.5, 0.5, event='restart')

    def test_row_filters(self, collector):
        """Test filtering rows by node, split and event."""
        assert [row.split for row in collector.rows(node='red')] == ['train', 'test']
        assert [row.node for row in collector.rows(split='test')] == ['red', 'ca', 'global']
        assert len(collector.rows(event=EPOCH_EVENT)) == 4
        assert collector.rows(node='ca', split='test')[0].accuracy == 0.8

    def test_to_frame(self, collector):
        """Test the CSV column layout with and without the event tag."""
        frame = collector.to_frame()
        tagged = collector.to_frame(include_event=True)

        assert list(frame.columns) == METRIC_COLUMNS
        assert list(tagged.columns) == METRIC_COLUMNS + ['event']
        assert list(tagged['event']) == [EPOCH_EVENT] * 4 + [AGGREGATION_EVENT]
        assert frame['accuracy'].tolist() == [0.5, 0.6, 0.4, 0.8, 0.7]

    def test_empty_frame_has_header(self):
        """Test that an empty collector still produces the column layout."""
        frame = MetricsCollector().to_frame()
        assert frame.empty
        assert list(frame.columns) == METRIC_COLUMNS

    def test_timing_metrics(self):
        """Test stage timing statistics."""
        metrics = MetricsCollector()
        for seconds in [4.0, 1.0, 3.0, 2.0, 5.0]:
            metrics.record_timing('train', seconds)

        summary = metrics.get_timing_metrics('train')

        assert summary['count'] == 5
        assert summary['avg'] == 3.0
        assert summary['min'] == 1.0
        assert summary['max'] == 5.0
        assert summary['median'] == 3.0
        assert summary['p95'] == pytest.approx(4.8)

    def test_timing_metrics_unknown_stage(self):
        """Test that a stage without timings reports zeros."""
        assert MetricsCollector().get_timing_metrics('missing')['count'] == 0

    def test_percentile_calculation(self):
        """Test percentile interpolation."""
        metrics = MetricsCollector()
        data = [1.0, 2.0, 3.0, 4.0]

        assert metrics._percentile(data, 0) == 1.0
        assert metrics._percentile(data, 50) == pytest.approx(2.5)
        assert metrics._percentile(data, 100) == 4.0
        assert metrics._percentile([], 50) == 0.0

    def test_accuracy_summary(self, collector):
        """Test mean and population spread of one split's accuracies."""
        summary = collector.get_accuracy_summary('test', event=EPOCH_EVENT)

        assert summary['count'] == 2
        assert summary['mean'] == pytest.approx(0.7)
        assert summary['std'] == pytest.approx(0.1)
        assert summary['min'] == 0.6
        assert summary['max'] == 0.8
        assert collector.get_accuracy_summary('validation')['count'] == 0

    def test_disabled_collector(self):
        """Test that a disabled collector records nothing."""
        metrics = MetricsCollector(enabled=False)
        metrics.record(0, 0, 'red', 'test', 2.0, 0.5)
        metrics.record_timing('train', 1.0)

        assert metrics.rows() == []
        assert metrics.timings() == {}

    def test_concurrent_recording(self):
        """Test that rows recorded from several threads are all kept."""
        metrics = MetricsCollector()

        def record(i):
            metrics.record(0, i, f"node{i % 3}", 'train', 0.5, 0.1)

        with ThreadPoolExecutor(max_workers=4) as executor:
            list(executor.map(record, range(200)))

        assert len(metrics.rows()) == 200
        assert sorted(row.epoch for row in metrics.rows()) == list(range(200))
