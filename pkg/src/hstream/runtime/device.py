"""Per-kind execution paths with explicit (simulated) device memory management.

Accelerators never touch host memory outside copy-in/copy-out: each chunk is
served by freshly allocated private buffers, the body evaluates against those
buffers only, and results are copied back into the claimed host range.

Each path returns the simulated seconds charged for the chunk under the
configured cost model (transfer seconds per MB plus elements divided by
speed). `SIM_ELEMENTS_PER_SECOND` anchors speed_factor 1.0; at 8-byte
elements that is 32 MiB/s, slow enough that paced multi-unit runs are
dominated by the model rather than by per-chunk interpreter dispatch, which
is serialized across controller threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from hstream.errors import DeviceMemoryError
from hstream.pdl import ProcessingUnit
from hstream.runtime.cursor import Chunk
from hstream.runtime.kernel import ExecutableKernel

SIM_ELEMENTS_PER_SECOND = 4_194_304

PhaseHook = Callable[[str], None]


@dataclass
class SimulatedDevice:
    """An in-process accelerator stand-in with private buffers and a cost model."""

    pu: ProcessingUnit
    device_buffers: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def speed_factor(self) -> float:
        return self.pu.speed_factor

    @property
    def transfer_cost_per_mb(self) -> float:
        return self.pu.transfer_cost_per_mb

    def compute_seconds(self, elements: int) -> float:
        return elements / (self.speed_factor * SIM_ELEMENTS_PER_SECOND)

    def transfer_seconds(self, bytes_moved: int) -> float:
        return self.transfer_cost_per_mb * (bytes_moved / 2**20)


def split_range(start: int, finish: int, parts: int) -> list[tuple[int, int]]:
    """Divide [start, finish) into at most `parts` contiguous non-empty ranges."""
    length = finish - start
    parts = max(1, min(parts, length))
    base, extra = divmod(length, parts)
    out = []
    lo = start
    for i in range(parts):
        hi = lo + base + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def run_on_cpu(kernel: ExecutableKernel, host_data: Mapping[str, np.ndarray],
               chunk: Chunk, worker_threads: int) -> None:
    """Evaluate a chunk in place on host memory, divided among worker ranges.

    The host path needs no data movement. The statements are elementwise, so
    applying them to every worker share at once is the same computation as one
    pass per share; the single vectorized pass keeps the interpreter out of
    the way of the other controllers. The configured CPU speed covers all of
    the unit's worker threads together, so the executor charges the chunk via
    `chunk_compute_seconds`; `split_range` defines the share boundaries the
    worker model stands for.
    """
    views = {name: host_data[name][chunk.start:chunk.finish]
             for name in kernel.array_names}
    kernel.eval_into(views, len(chunk))


def chunk_compute_seconds(pu: ProcessingUnit, elements: int) -> float:
    return elements / (pu.speed_factor * SIM_ELEMENTS_PER_SECOND)


def run_on_accelerator(dev: SimulatedDevice, kernel: ExecutableKernel,
                       host_data: Mapping[str, np.ndarray], chunk: Chunk,
                       phase_hook: Optional[PhaseHook] = None) -> float:
    """Serve one chunk on a simulated accelerator.

    In order: capacity check, allocate private buffers, copy in the kernel's
    transfer inputs, evaluate against device buffers only, copy outputs back
    to the claimed host range, free. Host elements outside the chunk are never
    read or written. `phase_hook`, when given, is called with
    'allocated' / 'copied_in' / 'evaluated' / 'copied_out' between phases so
    tests can poison host memory and prove the isolation contract.
    """
    length = len(chunk)
    needed = kernel.buffer_bytes_per_element * length
    if needed > dev.pu.memory_bytes:
        raise DeviceMemoryError(
            f"pu {dev.pu.id} ({dev.pu.kind.value}) cannot hold chunk "
            f"[{chunk.start}, {chunk.finish}): needs {needed / 2**20:.1f} MB, "
            f"device memory is {dev.pu.memory_gb} GB")

    buffers = dev.device_buffers
    sizes = kernel.element_sizes
    for name in kernel.array_names:
        buffers[name] = np.empty(length, dtype=kernel.numpy_dtypes[name])
    if phase_hook:
        phase_hook("allocated")

    bytes_moved = 0
    for name in kernel.transfer_ins:
        buffers[name][:] = host_data[name][chunk.start:chunk.finish]
        bytes_moved += sizes[name] * length
    if phase_hook:
        phase_hook("copied_in")

    kernel.eval_into(buffers, length)
    if phase_hook:
        phase_hook("evaluated")

    for name in kernel.transfer_outs:
        host_data[name][chunk.start:chunk.finish] = buffers[name]
        bytes_moved += sizes[name] * length
    if phase_hook:
        phase_hook("copied_out")

    dev.device_buffers.clear()
    return dev.transfer_seconds(bytes_moved) + dev.compute_seconds(length)
