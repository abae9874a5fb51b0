"""Three-stage streaming execution: data producer, data processor, data store.

Exactly three stage workers connected by bounded blocking queues realize the
model: the producer reads batches from a source and notifies the processor;
the processor distributes each batch's index space across the engaged units;
the store writes finished batches out strictly in sequence order. Bounded
queues give back-pressure, so at most `queue_capacity` batches sit between
any two stages and a slow consumer stalls the producer instead of growing
memory. Stages overlap across batches: while batch b is being written,
batch b+1 may be processing and batch b+2 may be being read.

Stream files are raw little-endian element records; a record holds one element
per named array, in array order, so multi-input kernels stream as interleaved
tuples.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Protocol, Union

import numpy as np

from hstream.errors import PipelineError
from hstream.ir import (
    ALL_DEVICES,
    AutoSchedule,
    DeviceSelector,
    ElementType,
    PerDeviceSchedule,
    SchedulingSpec,
    UniformSchedule,
)
from hstream.pdl import PlatformDescription, resolve_devices
from hstream.runtime import ExecutableKernel, RunStats, execute

DEFAULT_QUEUE_CAPACITY = 2


# --- Batches -------------------------------------------------------------------

@dataclass
class Batch:
    seq: int
    arrays: dict[str, np.ndarray]
    length: int


@dataclass
class ProcessedBatch:
    seq: int
    outputs: dict[str, np.ndarray]
    length: int
    stats: RunStats


@dataclass(frozen=True)
class StageDelays:
    """Injected per-batch stage durations, for scheduling experiments/tests."""

    read: float = 0.0
    process: float = 0.0
    write: float = 0.0


class StageTrace:
    """Begin/end timestamps per (batch, stage), recorded with a monotonic clock."""

    STAGES = ("read", "process", "write")

    def __init__(self):
        self._lock = threading.Lock()
        self._spans: dict[tuple[int, str], tuple[float, float]] = {}

    def record(self, seq: int, stage: str, begin: float, end: float) -> None:
        with self._lock:
            self._spans[(seq, stage)] = (begin, end)

    def span(self, seq: int, stage: str) -> tuple[float, float]:
        return self._spans[(seq, stage)]

    def has(self, seq: int, stage: str) -> bool:
        return (seq, stage) in self._spans

    @property
    def seqs(self) -> list[int]:
        return sorted({seq for seq, _ in self._spans})

    def stage_ordering_ok(self) -> bool:
        """read(b) ends before process(b) begins; process(b) before write(b)."""
        for seq in self.seqs:
            read = self._spans.get((seq, "read"))
            proc = self._spans.get((seq, "process"))
            write = self._spans.get((seq, "write"))
            if read and proc and read[1] > proc[0]:
                return False
            if proc and write and proc[1] > write[0]:
                return False
        return True

    def overlapping_write_process_pairs(self) -> list[tuple[int, int]]:
        """Batches b where write(b) overlaps process(b+1) in time."""
        pairs = []
        for seq in self.seqs:
            write = self._spans.get((seq, "write"))
            nxt = self._spans.get((seq + 1, "process"))
            if write and nxt and write[0] < nxt[1] and nxt[0] < write[1]:
                pairs.append((seq, seq + 1))
        return pairs


# --- Sources ---------------------------------------------------------------------

class StreamSource(Protocol):
    names: tuple[str, ...]

    def read(self, max_elements: int) -> tuple[int, dict[str, np.ndarray]]:
        """Return up to max_elements per array; count 0 signals end of stream."""
        ...


class GeneratedSource:
    """Deterministic pseudo-random source: each named array draws from its own
    seed stream, so content depends only on (seed, name, position), not on
    batch boundaries."""

    def __init__(self, names: Iterable[str], total_elements: int, seed: int = 42,
                 element_type: ElementType = ElementType.DOUBLE):
        self.names = tuple(names)
        self.total_elements = int(total_elements)
        self.element_type = element_type
        self._remaining = self.total_elements
        self._rngs = {
            name: np.random.default_rng([seed, i])
            for i, name in enumerate(self.names)
        }

    def read(self, max_elements: int) -> tuple[int, dict[str, np.ndarray]]:
        count = min(self._remaining, max_elements)
        if count <= 0:
            return 0, {}
        self._remaining -= count
        if self.element_type is ElementType.INT:
            arrays = {n: rng.integers(-1000, 1000, count, dtype=np.int32)
                      for n, rng in self._rngs.items()}
        else:
            arrays = {n: rng.random(count) for n, rng in self._rngs.items()}
        return count, arrays

    def read_all(self) -> dict[str, np.ndarray]:
        _, arrays = self.read(self.total_elements)
        return arrays


class FileSource:
    """Raw little-endian stream file of interleaved per-array records."""

    def __init__(self, path: Union[str, Path], names: Iterable[str],
                 element_type: ElementType = ElementType.DOUBLE):
        self.names = tuple(names)
        if not self.names:
            raise ValueError("a file source needs at least one named array")
        self.element_type = element_type
        self._dtype = np.dtype(element_type.numpy_dtype).newbyteorder("<")
        self._record_bytes = self._dtype.itemsize * len(self.names)
        self._fh = open(path, "rb")

    def read(self, max_elements: int) -> tuple[int, dict[str, np.ndarray]]:
        raw = self._fh.read(self._record_bytes * max_elements)
        if not raw:
            return 0, {}
        if len(raw) % self._record_bytes:
            raise PipelineError(
                f"truncated stream: {len(raw)} bytes is not a whole number of "
                f"{self._record_bytes}-byte records")
        records = np.frombuffer(raw, dtype=self._dtype).reshape(-1, len(self.names))
        count = records.shape[0]
        # column copies: frombuffer views are read-only, inout arrays need writes
        arrays = {name: records[:, i].copy() for i, name in enumerate(self.names)}
        return count, arrays

    def close(self) -> None:
        self._fh.close()


# --- Sinks ----------------------------------------------------------------------

class FileSink:
    """Writes output arrays as interleaved little-endian records."""

    def __init__(self, path: Union[str, Path], names: Iterable[str]):
        self.names = tuple(names)
        self._fh = open(path, "wb")

    def write(self, batch: ProcessedBatch) -> None:
        if not self.names:
            return
        columns = [np.asarray(batch.outputs[name]) for name in self.names]
        dtype = columns[0].dtype.newbyteorder("<")
        stacked = np.stack([c.astype(dtype, copy=False) for c in columns], axis=1)
        self._fh.write(stacked.tobytes())

    def close(self) -> None:
        self._fh.close()


class DiscardSink:
    def write(self, batch: ProcessedBatch) -> None:
        pass

    def close(self) -> None:
        pass


class MemorySink:
    """Keeps written batches; `arrays()` concatenates them in write order."""

    def __init__(self):
        self.batches: list[ProcessedBatch] = []

    def write(self, batch: ProcessedBatch) -> None:
        self.batches.append(batch)

    def close(self) -> None:
        pass

    @property
    def seqs(self) -> list[int]:
        return [b.seq for b in self.batches]

    def arrays(self) -> dict[str, np.ndarray]:
        if not self.batches:
            return {}
        names = self.batches[0].outputs.keys()
        return {n: np.concatenate([b.outputs[n] for b in self.batches])
                for n in names}


# --- Stage operations -------------------------------------------------------------

def produce(source: StreamSource, batch_elements: int) -> Iterator[Batch]:
    """Carve the source into consecutively numbered batches; the last one may
    be shorter."""
    if batch_elements < 1:
        raise ValueError("batch_elements must be >= 1")
    seq = 0
    while True:
        count, arrays = source.read(batch_elements)
        if count == 0:
            return
        yield Batch(seq=seq, arrays=arrays, length=count)
        seq += 1


def process(batch: Batch, kernel: ExecutableKernel,
            platform: PlatformDescription,
            device: DeviceSelector = ALL_DEVICES,
            scheduling: SchedulingSpec = AutoSchedule(),
            *, pace: bool = False) -> ProcessedBatch:
    """Run one batch's index space through the multi-unit executor."""
    host: dict[str, np.ndarray] = {}
    for name in kernel.input_arrays:
        host[name] = np.asarray(batch.arrays[name])
    for name in kernel.array_names:
        if name not in host:
            host[name] = np.zeros(
                batch.length, dtype=kernel.array_types[name].numpy_dtype)
    stats = execute(kernel, host, platform, device, scheduling, pace=pace)
    outputs = {name: host[name] for name in kernel.output_arrays}
    return ProcessedBatch(seq=batch.seq, outputs=outputs,
                          length=batch.length, stats=stats)


def store(processed: Iterable[ProcessedBatch], sink) -> int:
    """Write batches to the sink strictly in sequence order, whatever order
    they arrive in. Returns the number of batches written."""
    pending: dict[int, ProcessedBatch] = {}
    expected = 0
    for item in processed:
        pending[item.seq] = item
        while expected in pending:
            sink.write(pending.pop(expected))
            expected += 1
    if pending:
        missing = expected
        raise PipelineError(f"stream ended but batch {missing} never arrived "
                            f"(have {sorted(pending)})")
    return expected


def default_batch_elements(kernel: ExecutableKernel,
                           platform: PlatformDescription,
                           device: DeviceSelector,
                           scheduling: SchedulingSpec) -> int:
    """Batch sizing rule: directive chunk size x engaged units x 4 (AUTO uses
    the 1 MB policy floor as its chunk stand-in)."""
    engaged = len(resolve_devices(platform, device))
    element_size = max((kernel.element_size(n) for n in kernel.array_names),
                       default=8)
    if isinstance(scheduling, UniformSchedule):
        chunk = scheduling.chunk_elements
    elif isinstance(scheduling, PerDeviceSchedule):
        chunk = max(scheduling.as_dict().values())
    else:
        chunk = max(1, 2**20 // element_size)
    return max(1, chunk * engaged * 4)


# --- The pipeline ------------------------------------------------------------------

_DONE = object()


def _put(q: queue.Queue, item, cancel: threading.Event) -> bool:
    while True:
        try:
            q.put(item, timeout=0.05)
            return True
        except queue.Full:
            if cancel.is_set():
                return False


def _get(q: queue.Queue, cancel: threading.Event):
    while True:
        try:
            return q.get(timeout=0.05)
        except queue.Empty:
            if cancel.is_set():
                return _DONE


class _Stage(threading.Thread):
    """A pipeline worker; the first exception cancels the whole run."""

    def __init__(self, name: str, cancel: threading.Event,
                 errors: list[BaseException], lock: threading.Lock):
        super().__init__(name=f"hstream-{name}", daemon=True)
        self.cancel = cancel
        self.errors = errors
        self.errors_lock = lock

    def fail(self, exc: BaseException) -> None:
        with self.errors_lock:
            self.errors.append(exc)
        self.cancel.set()


def run_pipeline(source: StreamSource, kernel: ExecutableKernel,
                 platform: PlatformDescription,
                 device: DeviceSelector = ALL_DEVICES,
                 scheduling: SchedulingSpec = AutoSchedule(),
                 batch_elements: Optional[int] = None,
                 sink=None,
                 *,
                 queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
                 stage_delays: Optional[StageDelays] = None,
                 pace: bool = False) -> tuple[RunStats, StageTrace]:
    """Run the full producer/processor/store pipeline over a stream.

    Returns aggregate run statistics (bytes follow the kernel's accounting
    convention; wall time spans the whole pipeline) and the stage trace.
    Any stage error cancels the others and re-raises as PipelineError.
    """
    if sink is None:
        sink = DiscardSink()
    if batch_elements is None:
        batch_elements = default_batch_elements(kernel, platform, device,
                                                scheduling)
    delays = stage_delays or StageDelays()
    trace = StageTrace()
    to_process: queue.Queue = queue.Queue(maxsize=queue_capacity)
    to_store: queue.Queue = queue.Queue(maxsize=queue_capacity)
    cancel = threading.Event()
    errors: list[BaseException] = []
    errors_lock = threading.Lock()
    batch_stats: list[RunStats] = []
    lengths: list[int] = []

    class Reader(_Stage):
        def run(self):
            try:
                seq = 0
                while not self.cancel.is_set():
                    begin = time.monotonic()
                    count, arrays = source.read(batch_elements)
                    if delays.read:
                        time.sleep(delays.read)
                    if count == 0:
                        break
                    trace.record(seq, "read", begin, time.monotonic())
                    if not _put(to_process, Batch(seq, arrays, count), self.cancel):
                        return
                    seq += 1
            except BaseException as exc:
                self.fail(exc)
            finally:
                _put(to_process, _DONE, self.cancel)

    class Processor(_Stage):
        def run(self):
            try:
                while True:
                    item = _get(to_process, self.cancel)
                    if item is _DONE:
                        break
                    begin = time.monotonic()
                    result = process(item, kernel, platform, device,
                                     scheduling, pace=pace)
                    if delays.process:
                        time.sleep(delays.process)
                    trace.record(item.seq, "process", begin, time.monotonic())
                    if not _put(to_store, result, self.cancel):
                        return
            except BaseException as exc:
                self.fail(exc)
            finally:
                _put(to_store, _DONE, self.cancel)

    class Writer(_Stage):
        def run(self):
            pending: dict[int, ProcessedBatch] = {}
            expected = 0
            try:
                while True:
                    item = _get(to_store, self.cancel)
                    if item is _DONE:
                        break
                    pending[item.seq] = item
                    while expected in pending:
                        part = pending.pop(expected)
                        begin = time.monotonic()
                        sink.write(part)
                        if delays.write:
                            time.sleep(delays.write)
                        trace.record(part.seq, "write", begin, time.monotonic())
                        batch_stats.append(part.stats)
                        lengths.append(part.length)
                        expected += 1
                if pending and not self.cancel.is_set():
                    raise PipelineError(
                        f"stream ended but batch {expected} never arrived")
            except BaseException as exc:
                self.fail(exc)

    started = time.monotonic()
    stages = [Reader("reader", cancel, errors, errors_lock),
              Processor("processor", cancel, errors, errors_lock),
              Writer("writer", cancel, errors, errors_lock)]
    for s in stages:
        s.start()
    for s in stages:
        s.join()
    wall = time.monotonic() - started

    if errors:
        first = errors[0]
        raise PipelineError(f"pipeline failed in flight: {first}") from first

    stats = RunStats.aggregate(batch_stats, wall)
    # Aggregate parts report per-batch bytes already; recompute from lengths to
    # cover the zero-batch case uniformly.
    bytes_moved = kernel.bytes_per_element * sum(lengths)
    stats.bytes_moved = bytes_moved
    stats.throughput_mb_s = (bytes_moved / 2**20) / wall if wall > 0 else 0.0
    return stats, trace
