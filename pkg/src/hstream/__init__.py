"""Heterogeneous stream computing toolkit.

A pragma-annotated C-like program compiles (per directive) into host-parallel,
GPU-kernel, and coprocessor-offload source fragments plus a driver; a
simulated heterogeneous runtime distributes chunked index ranges across the
platform's processing units; a three-stage pipeline streams batches through
that runtime; and a benchmark harness measures verified throughput.
"""

from hstream import bench
from hstream.codegen import (
    ALL_TARGETS,
    EmittedUnit,
    TargetKind,
    gen_cuda,
    gen_driver,
    gen_leo,
    gen_openmp,
    generate,
    normalize_ws,
)
from hstream.errors import (
    CompileError,
    ConfigurationError,
    DeviceMemoryError,
    Diagnostic,
    PdlError,
    PipelineError,
    ResolveError,
    VerificationError,
)
from hstream.frontend import (
    CompileResult,
    compile_file,
    compile_source,
    format_program,
    unit_name_for,
)
from hstream.ir import (
    ALL_DEVICES,
    AllDevices,
    AutoSchedule,
    BoundVar,
    DeviceIds,
    ElementType,
    KernelSpec,
    PerDeviceSchedule,
    UniformSchedule,
    VarKind,
)
from hstream.pdl import (
    PlatformDescription,
    ProcessingUnit,
    PuKind,
    parse_pdl,
    parse_pdl_file,
    resolve_devices,
)
from hstream.pipeline import (
    Batch,
    DiscardSink,
    FileSink,
    FileSource,
    GeneratedSource,
    MemorySink,
    ProcessedBatch,
    StageDelays,
    StageTrace,
    produce,
    process,
    run_pipeline,
    store,
)
from hstream.runtime import (
    Chunk,
    ExecutableKernel,
    RunStats,
    SharedCursor,
    SimulatedDevice,
    chunk_size_for,
    claim_chunk,
    evaluate_sequential,
    execute,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_DEVICES",
    "ALL_TARGETS",
    "AllDevices",
    "AutoSchedule",
    "Batch",
    "BoundVar",
    "Chunk",
    "CompileError",
    "CompileResult",
    "ConfigurationError",
    "DeviceIds",
    "DeviceMemoryError",
    "Diagnostic",
    "DiscardSink",
    "ElementType",
    "EmittedUnit",
    "ExecutableKernel",
    "FileSink",
    "FileSource",
    "GeneratedSource",
    "KernelSpec",
    "MemorySink",
    "PdlError",
    "PerDeviceSchedule",
    "PipelineError",
    "PlatformDescription",
    "ProcessedBatch",
    "ProcessingUnit",
    "PuKind",
    "ResolveError",
    "RunStats",
    "SharedCursor",
    "SimulatedDevice",
    "StageDelays",
    "StageTrace",
    "TargetKind",
    "UniformSchedule",
    "VarKind",
    "VerificationError",
    "bench",
    "chunk_size_for",
    "claim_chunk",
    "compile_file",
    "compile_source",
    "evaluate_sequential",
    "execute",
    "format_program",
    "gen_cuda",
    "gen_driver",
    "gen_leo",
    "gen_openmp",
    "generate",
    "normalize_ws",
    "parse_pdl",
    "parse_pdl_file",
    "process",
    "produce",
    "resolve_devices",
    "run_pipeline",
    "store",
    "unit_name_for",
]
