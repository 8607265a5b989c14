"""
Dataset access instrumentation used to prove that training never touches
held-out data.
"""
import logging
import threading
from collections import Counter
from contextlib import contextmanager
from typing import Dict, Iterable, Iterator, Sequence, Tuple, Union, overload

from src.models import LabeledSample
from .exceptions import LeakageError


logger = logging.getLogger(__name__)


IDLE_PHASE = 'idle'


class AccessAudit:
    """
    Thread-safe counter of sample reads keyed by (dataset role, phase).

    The phase is process-wide for the audit: training phases and evaluation
    phases never overlap because evaluation always waits for training to end.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._reads: Counter = Counter()
        self._phase = IDLE_PHASE

    @property
    def current_phase(self) -> str:
        return self._phase

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        """Attribute reads inside the block to `name`."""
        with self._lock:
            previous, self._phase = self._phase, name
        try:
            yield
        finally:
            with self._lock:
                self._phase = previous

    def record(self, role: str, count: int = 1) -> None:
        with self._lock:
            self._reads[(role, self._phase)] += count

    def reads(self, role: str = None, phase: str = None) -> int:
        with self._lock:
            return sum(
                n for (r, p), n in self._reads.items()
                if (role is None or r == role) and (phase is None or p == phase)
            )

    def snapshot(self) -> Dict[Tuple[str, str], int]:
        with self._lock:
            return dict(self._reads)

    def assert_no_reads(self, roles: Iterable[str], phases: Iterable[str]) -> None:
        """
        Raises:
            LeakageError: If any protected role was read during any listed phase
        """
        roles = set(roles)
        phases = set(phases)
        leaks = {
            key: n for key, n in self.snapshot().items()
            if key[0] in roles and key[1] in phases and n > 0
        }
        if leaks:
            raise LeakageError(f"Protected datasets were read during training: {leaks}")


class AuditedDataset(Sequence):
    """Read-only sample sequence that reports every item access to an AccessAudit."""

    def __init__(self, samples: Sequence[LabeledSample], role: str, audit: AccessAudit):
        self._samples = list(samples)
        self.role = role
        self.audit = audit

    def __len__(self) -> int:
        return len(self._samples)

    @overload
    def __getitem__(self, index: int) -> LabeledSample: ...

    @overload
    def __getitem__(self, index: slice) -> Sequence[LabeledSample]: ...

    def __getitem__(self, index: Union[int, slice]):
        if isinstance(index, slice):
            items = self._samples[index]
            self.audit.record(self.role, len(items))
            return items
        item = self._samples[index]
        self.audit.record(self.role)
        return item

    def __repr__(self) -> str:
        return f"AuditedDataset(role={self.role!r}, size={len(self)})"
