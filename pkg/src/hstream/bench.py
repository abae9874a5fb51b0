"""Memory-throughput kernel suite, sweep driver, and source-form line counting.

The six kernels (COPY, SCALE, ADD, TRIAD, FILL, DAXPY) are defined as pragma
source and compiled through the regular frontend, so the sweep exercises the
whole stack. Every run is verified against the sequential reference before
its throughput is recorded; an unverified run aborts the sweep naming the
cell. Cells run one at a time so timings never contend with each other;
inputs are materialized before the measured window, configurations rotate
innermost so shared-host drift lands on all of them alike, and a run whose
wall blows past the configuration's analytic floor is remeasured.

Bytes-per-element accounting follows the usual memory-benchmark convention:
one element-size per array read plus one per array write (COPY/SCALE move 2
arrays, ADD/TRIAD/DAXPY 3, FILL 1).
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from hstream.errors import ResolveError, VerificationError
from hstream.frontend import compile_source
from hstream.ir import DeviceIds, ElementType, KernelSpec, UniformSchedule
from hstream.pdl import PlatformDescription, PuKind
from hstream.pipeline import GeneratedSource, MemorySink, run_pipeline
from hstream.runtime import ExecutableKernel, evaluate_sequential

MB = 2**20
DOUBLE_BYTES = ElementType.DOUBLE.size_bytes

DEFAULT_SCALAR = 3.0


@dataclass(frozen=True)
class KernelDef:
    name: str
    body: str
    clauses: str
    bytes_per_element: int


_KERNEL_DEFS = (
    KernelDef("COPY", "a = b;", "in(b) out(a)", 16),
    KernelDef("SCALE", "a = scalar*b;", "in(b, scalar) out(a)", 16),
    KernelDef("ADD", "c = a + b;", "in(a, b) out(c)", 24),
    KernelDef("TRIAD", "a = b+scalar*c;", "in(b,c,a,scalar) out(a)", 24),
    KernelDef("FILL", "a = scalar;", "in(scalar) out(a)", 8),
    KernelDef("DAXPY", "y = y + scalar*x;", "in(x, scalar) inout(y)", 24),
)

_DECLS = """\
double a[1024];
double b[1024];
double c[1024];
double x[1024];
double y[1024];
double scalar;
"""


def kernel_catalog() -> list[KernelDef]:
    """The six benchmark kernels with their elementwise bodies."""
    return list(_KERNEL_DEFS)


def kernel_def(name: str) -> KernelDef:
    for k in _KERNEL_DEFS:
        if k.name == name.upper():
            return k
    raise KeyError(f"unknown benchmark kernel '{name}' "
                   f"(have {[k.name for k in _KERNEL_DEFS]})")


def build_kernel(defn: KernelDef, scalar: float = DEFAULT_SCALAR,
                 chunk_elements: int = 4096) -> tuple[KernelSpec, ExecutableKernel]:
    """Compile one benchmark kernel through the frontend and bind its scalar."""
    source = (f"{_DECLS}"
              f"#pragma hstream {defn.clauses} device(*) scheduling({chunk_elements})\n"
              f"{{\n    {defn.body}\n}}\n")
    spec = compile_source(source, defn.name).kernels[0]
    kernel = ExecutableKernel.from_kernel_spec(spec, {"scalar": scalar})
    if kernel.bytes_per_element != defn.bytes_per_element:
        raise VerificationError(
            f"{defn.name}: accounting drifted, {kernel.bytes_per_element} != "
            f"{defn.bytes_per_element} bytes/element")
    return spec, kernel


# --- Device configurations ---------------------------------------------------------

_CONFIG_RE = re.compile(r"^(?P<cpu>CPU)?(?:\+?(?P<n>\d+)GPUs?)?$", re.IGNORECASE)


def resolve_config(platform: PlatformDescription, name: str) -> DeviceIds:
    """Named unit sets: 'CPU', '<k>GPUs', 'CPU+<k>GPUs'."""
    m = _CONFIG_RE.match(name.strip())
    if not m or (not m.group("cpu") and not m.group("n")):
        raise ResolveError(f"cannot parse device configuration '{name}'")
    ids: list[int] = []
    if m.group("cpu"):
        cpus = platform.of_kind(PuKind.CPU)
        ids.extend(pu.id for pu in cpus)
    if m.group("n"):
        want = int(m.group("n"))
        gpus = platform.of_kind(PuKind.GPU)
        if len(gpus) < want:
            raise ResolveError(
                f"configuration '{name}' wants {want} gpus, platform "
                f"'{platform.name}' has {len(gpus)}")
        ids.extend(pu.id for pu in gpus[:want])
    return DeviceIds(tuple(ids))


# --- Experiment plans ----------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPlan:
    kernels: tuple[str, ...]
    stream_sizes_mb: tuple[float, ...]
    chunk_sizes_mb: tuple[float, ...]
    device_configs: tuple[str, ...]
    repeats: int
    seed: int = 42
    batch_mb: Optional[float] = None  # None = whole stream in one batch

    def __post_init__(self):
        if not (self.kernels and self.stream_sizes_mb and self.chunk_sizes_mb
                and self.device_configs and self.repeats >= 1):
            raise ValueError("experiment plan lists must be non-empty, repeats >= 1")

    @property
    def cells(self) -> int:
        return (len(self.kernels) * len(self.stream_sizes_mb)
                * len(self.chunk_sizes_mb) * len(self.device_configs))


def desk_plan() -> ExperimentPlan:
    """CI-sized sweep. Every cell keeps >= 256 chunks per stream: with uniform
    chunking, a slow unit holding one of the last chunks stalls the finish, so
    short streams would mask the extra capacity of a wider device set."""
    return ExperimentPlan(
        kernels=tuple(k.name for k in _KERNEL_DEFS),
        stream_sizes_mb=(64,),
        chunk_sizes_mb=(0.125, 0.25),
        device_configs=("CPU", "4GPUs", "CPU+4GPUs"),
        repeats=4,
    )


def paper_plan() -> ExperimentPlan:
    """The full-scale factorial sweep (hours of simulated time; not for CI)."""
    return ExperimentPlan(
        kernels=tuple(k.name for k in _KERNEL_DEFS),
        stream_sizes_mb=(256, 512, 1024, 2048, 4096, 8192),
        chunk_sizes_mb=(1, 2, 4, 8, 16, 32, 64),
        device_configs=("CPU", "4GPUs", "CPU+4GPUs"),
        repeats=10,
    )


@dataclass(frozen=True)
class ResultRow:
    kernel: str
    stream_mb: float
    chunk_mb: float
    device_config: str
    repeat_index: int
    throughput_mb_s: float
    verified: bool


def _elements(mb: float) -> int:
    return max(1, int(mb * MB) // DOUBLE_BYTES)


class _ArraySource:
    """Streams pre-materialized arrays, so measured walls cover processing
    rather than input synthesis. Arrays the kernel also writes (inout) are
    copied per read; pure inputs are handed out as views."""

    def __init__(self, arrays: dict, total_elements: int, copy_names=()):
        self.names = tuple(arrays)
        self._arrays = arrays
        self._total = total_elements
        self._copy = set(copy_names)
        self._pos = 0

    def read(self, max_elements: int):
        count = min(self._total - self._pos, max_elements)
        if count <= 0:
            return 0, {}
        lo, hi = self._pos, self._pos + count
        self._pos = hi
        out = {}
        for name, arr in self._arrays.items():
            part = arr[lo:hi]
            out[name] = part.copy() if name in self._copy else part
        return count, out


# A paced run's wall time cannot honestly beat the configuration's analytic
# service floor (all units consuming elements at their modelled rates); walls
# far above it mean the host stole the CPU mid-measurement. Such runs are
# remeasured a bounded number of times and the fastest attempt is kept, so
# shared-machine noise does not masquerade as a scheduling effect. The
# threshold sits above the legitimate end-of-stream straggler overhead of
# mixed-speed units.
MEASUREMENT_ATTEMPTS = 3
_INTERFERENCE_LIMIT = 1.3


def ideal_seconds(kernel: ExecutableKernel, platform: PlatformDescription,
                  device: DeviceIds, total_elements: int) -> float:
    """Lower-bound wall time: every unit serves elements at its modelled rate
    (compute plus, for accelerators, per-element transfer volume)."""
    from hstream.pdl import resolve_devices
    from hstream.runtime import SIM_ELEMENTS_PER_SECOND

    moved_bytes = sum(kernel.element_sizes[n] for n in kernel.transfer_ins) \
        + sum(kernel.element_sizes[n] for n in kernel.transfer_outs)
    rate = 0.0
    for pu in resolve_devices(platform, device):
        per_element = 1.0 / (pu.speed_factor * SIM_ELEMENTS_PER_SECOND)
        if pu.kind is not PuKind.CPU:
            per_element += pu.transfer_cost_per_mb * moved_bytes / MB
        rate += 1.0 / per_element
    return total_elements / rate


def _interference(stats, floor_seconds: float) -> float:
    if floor_seconds <= 0.0:
        return 1.0
    return stats.wall_time / floor_seconds


def run_cell(defn: KernelDef, platform: PlatformDescription, stream_mb: float,
             chunk_mb: float, config: str, repeat_index: int, seed: int,
             batch_mb: Optional[float], pace: bool = True) -> ResultRow:
    """One verified benchmark run; raises VerificationError on divergence."""
    chunk_elements = _elements(chunk_mb)
    total_elements = _elements(stream_mb)
    batch_elements = total_elements if batch_mb is None \
        else min(total_elements, _elements(batch_mb))
    _, kernel = build_kernel(defn, chunk_elements=chunk_elements)
    device = resolve_config(platform, config)
    cell_seed = seed + 1009 * repeat_index

    inputs = GeneratedSource(kernel.input_arrays, total_elements,
                             seed=cell_seed).read_all()
    inout_names = set(kernel.input_arrays) & set(kernel.transfer_outs)

    floor = ideal_seconds(kernel, platform, device, total_elements)
    stats = sink = best = None
    for _ in range(MEASUREMENT_ATTEMPTS):
        attempt_sink = MemorySink()
        source = _ArraySource(inputs, total_elements, copy_names=inout_names)
        attempt_stats, _ = run_pipeline(source, kernel, platform, device,
                                        UniformSchedule(chunk_elements),
                                        batch_elements=batch_elements,
                                        sink=attempt_sink, pace=pace)
        phi = _interference(attempt_stats, floor)
        if best is None or phi < best:
            best, stats, sink = phi, attempt_stats, attempt_sink
        if not pace or phi <= _INTERFERENCE_LIMIT:
            break

    expected = evaluate_sequential(kernel, inputs, total_elements)
    produced = sink.arrays()
    for name in kernel.output_arrays:
        if produced.get(name) is None \
                or produced[name].tobytes() != expected[name].tobytes():
            raise VerificationError(
                f"unverified result in cell kernel={defn.name} "
                f"stream_mb={stream_mb} chunk_mb={chunk_mb} config={config} "
                f"repeat={repeat_index}: output '{name}' diverged from the "
                f"sequential reference")
    return ResultRow(defn.name, stream_mb, chunk_mb, config, repeat_index,
                     stats.throughput_mb_s, verified=True)


def run_experiment(plan: ExperimentPlan, platform: PlatformDescription,
                   pace: bool = True,
                   progress=None) -> list[ResultRow]:
    """Full factorial sweep, cells sequential, every run verified.

    Device configurations rotate innermost, so each repeat measures every
    configuration back-to-back; slow stretches of a shared host then land on
    all configurations alike instead of biasing whichever one ran during them.
    """
    rows: list[ResultRow] = []
    for kernel_name in plan.kernels:
        defn = kernel_def(kernel_name)
        for stream_mb in plan.stream_sizes_mb:
            for chunk_mb in plan.chunk_sizes_mb:
                for rep in range(plan.repeats):
                    for config in plan.device_configs:
                        row = run_cell(defn, platform, stream_mb, chunk_mb,
                                       config, rep, plan.seed, plan.batch_mb,
                                       pace=pace)
                        rows.append(row)
                        if progress:
                            progress(row)
    return rows


def mean_throughputs(rows: Iterable[ResultRow]) -> dict[tuple, float]:
    """Mean throughput per (kernel, stream_mb, chunk_mb, device_config)."""
    acc: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row.kernel, row.stream_mb, row.chunk_mb, row.device_config)
        acc.setdefault(key, []).append(row.throughput_mb_s)
    return {key: sum(v) / len(v) for key, v in acc.items()}


def config_means(rows: Iterable[ResultRow]) -> dict[tuple[str, str], float]:
    """Mean throughput per (kernel, device_config) across all cells."""
    acc: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        acc.setdefault((row.kernel, row.device_config), []).append(
            row.throughput_mb_s)
    return {key: sum(v) / len(v) for key, v in acc.items()}


def summarize(rows: list[ResultRow]) -> str:
    """Per-cell mean throughput as CSV, one line per cell, sorted by the
    (kernel, stream, chunk, config) tuple."""
    if not rows:
        raise ValueError("no result rows to summarize")
    means = mean_throughputs(rows)
    counts: dict[tuple, int] = {}
    for row in rows:
        key = (row.kernel, row.stream_mb, row.chunk_mb, row.device_config)
        counts[key] = counts.get(key, 0) + 1
    out = io.StringIO()
    out.write("kernel,stream_mb,chunk_mb,device_config,mean_throughput_mb_s,repeats\n")
    for key in sorted(means):
        kernel, stream_mb, chunk_mb, config = key
        out.write(f"{kernel},{_num(stream_mb)},{_num(chunk_mb)},{config},"
                  f"{means[key]:.3f},{counts[key]}\n")
    return out.getvalue()


def _num(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


# --- Source-form line counting ---------------------------------------------------------

_PRAGMA_LINE = re.compile(r"^#\s*pragma\s+hstream\b")


def count_file_loc(path: Union[str, Path]) -> tuple[int, int]:
    """(total_loc, hstream_loc): non-blank non-comment lines, and the subset
    that are stream pragma lines."""
    total = 0
    pragmas = 0
    in_block_comment = False
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if in_block_comment:
            if "*/" in line:
                in_block_comment = False
                line = line.split("*/", 1)[1].strip()
            else:
                continue
        if line.startswith("/*"):
            if "*/" in line:
                line = line.split("*/", 1)[1].strip()
            else:
                in_block_comment = True
                continue
        if not line or line.startswith("//"):
            continue
        total += 1
        if _PRAGMA_LINE.match(line):
            pragmas += 1
    return total, pragmas


def count_pragma_loc(corpus: Union[str, Path]) -> dict[str, tuple[int, int]]:
    """LOC per file for a corpus directory (``*.hs.c``) or a single file."""
    root = Path(corpus)
    if root.is_dir():
        files = sorted(root.glob("*.hs.c"))
    else:
        files = [root]
    return {str(f): count_file_loc(f) for f in files}
