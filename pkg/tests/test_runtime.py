"""Chunk claiming, scheduling policy, device paths, and multi-unit execution."""

import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hstream.errors import ConfigurationError, DeviceMemoryError
from hstream.frontend import compile_source
from hstream.ir import (
    AutoSchedule,
    DeviceIds,
    PerDeviceSchedule,
    UniformSchedule,
)
from hstream.pdl import parse_pdl
from hstream.runtime import (
    AUTO_MAX_BYTES,
    AUTO_MIN_BYTES,
    CPU_WORKERS_ENV,
    Chunk,
    ExecutableKernel,
    SharedCursor,
    SimulatedDevice,
    chunk_size_for,
    claim_chunk,
    cpu_worker_count,
    evaluate_sequential,
    execute,
    run_on_accelerator,
    run_on_cpu,
    split_range,
)
from tests.conftest import DISA_PDL, TRIAD_SOURCE


def triad():
    spec = compile_source(TRIAD_SOURCE, "Triad").kernels[0]
    return ExecutableKernel.from_kernel_spec(spec, {"scalar": 3.0})


def kernel_of(src, scalars=None, name="K"):
    spec = compile_source(src, name).kernels[0]
    return ExecutableKernel.from_kernel_spec(spec, scalars or {})


FILL = """double a[64];
double scalar;
#pragma hstream in(scalar) out(a)
{
    a = scalar;
}
"""


# --- claiming ----------------------------------------------------------------

def test_sequential_claims_partition_total():
    # hand enumeration: 10 in steps of 4 -> [0,4) [4,8) [8,10), then exhausted
    cursor = SharedCursor(10)
    claims = [claim_chunk(cursor, 4) for _ in range(4)]
    assert claims[0] == Chunk(0, 4)
    assert claims[1] == Chunk(4, 8)
    assert claims[2] == Chunk(8, 10)
    assert claims[3] is None


def test_empty_total_exhausts_immediately():
    assert claim_chunk(SharedCursor(0), 8) is None


def test_chunk_clamped_at_total():
    cursor = SharedCursor(5)
    assert claim_chunk(cursor, 8) == Chunk(0, 5)
    assert claim_chunk(cursor, 8) is None


def test_claim_requires_positive_chunk():
    with pytest.raises(ValueError):
        claim_chunk(SharedCursor(5), 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10_000), st.integers(1, 10_000), st.integers(1, 8))
def test_concurrent_claims_disjoint_cover(total, chunk, n_threads):
    chunk = min(chunk, total)
    cursor = SharedCursor(total, record_claims=True)
    per_thread = {i: 0 for i in range(n_threads)}

    def worker(tid):
        while True:
            claimed = cursor.claim(chunk, tag=tid)
            if claimed is None:
                return
            per_thread[tid] += len(claimed)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    log = cursor.claim_log
    assert [r.start for r in log] == sorted(r.start for r in log)
    covered = 0
    for record in log:
        assert record.start == covered  # disjoint, gap-free
        covered = record.finish
    assert covered == total
    assert sum(per_thread.values()) == total


# --- chunk sizing ---------------------------------------------------------------

def make_platform():
    return parse_pdl(DISA_PDL)


def test_uniform_chunk_for_any_unit():
    platform = make_platform()
    for pu in platform.pus:
        assert chunk_size_for(pu, UniformSchedule(4096), 10**7) == 4096


def test_per_device_lookup():
    platform = make_platform()
    spec = PerDeviceSchedule(((1, 1000), (2, 5000)))
    assert chunk_size_for(platform.by_id(2), spec, 10**6) == 5000


def test_per_device_missing_engaged_unit_is_config_error():
    platform = make_platform()
    spec = PerDeviceSchedule(((1, 1000),))
    with pytest.raises(ConfigurationError):
        chunk_size_for(platform.by_id(2), spec, 10**6)


def test_auto_proportional_to_speed():
    # clamp-free total divisible by 16 * (1 + 4): direct formula evaluation
    # gives cpu 131072 and gpu 524288, exactly 4x.
    platform = make_platform()
    cpu, gpu = platform.by_id(0), platform.by_id(1)
    engaged = [cpu, gpu]
    total = 80 * 2**17
    cpu_chunk = chunk_size_for(cpu, AutoSchedule(), total, engaged=engaged)
    gpu_chunk = chunk_size_for(gpu, AutoSchedule(), total, engaged=engaged)
    assert cpu_chunk == 131072
    assert gpu_chunk == 524288
    assert gpu_chunk == 4 * cpu_chunk


def test_auto_clamps_to_floor_and_ceiling():
    platform = make_platform()
    cpu, gpu = platform.by_id(0), platform.by_id(1)
    engaged = [cpu, gpu]
    floor = AUTO_MIN_BYTES // 8
    ceiling = AUTO_MAX_BYTES // 8
    assert chunk_size_for(cpu, AutoSchedule(), 2**20, engaged=engaged) == floor
    assert chunk_size_for(gpu, AutoSchedule(), 2**34, engaged=engaged) == ceiling


def test_auto_without_engaged_list_rejected():
    platform = make_platform()
    with pytest.raises(ConfigurationError):
        chunk_size_for(platform.by_id(0), AutoSchedule(), 100)


# --- cpu path --------------------------------------------------------------------

def test_run_on_cpu_triad_values():
    # arithmetic oracle: 1+3*10=31, 2+3*20=62
    kern = triad()
    host = {"a": np.zeros(2), "b": np.array([1.0, 2.0]),
            "c": np.array([10.0, 20.0])}
    run_on_cpu(kern, host, Chunk(0, 2), worker_threads=2)
    assert host["a"].tolist() == [31.0, 62.0]


def test_run_on_cpu_fill_constant():
    kern = kernel_of(FILL, {"scalar": 7.0})
    host = {"a": np.zeros(3)}
    run_on_cpu(kern, host, Chunk(0, 3), worker_threads=4)
    assert host["a"].tolist() == [7.0, 7.0, 7.0]


def test_split_range_covers_and_bounds_parts():
    parts = split_range(3, 50, 8)
    assert len(parts) == 8
    assert parts[0][0] == 3 and parts[-1][1] == 50
    for (alo, ahi), (blo, bhi) in zip(parts, parts[1:]):
        assert ahi == blo and alo < ahi
    assert split_range(0, 3, 8) == [(0, 1), (1, 2), (2, 3)]


def test_cpu_worker_count_rule_and_env_override(monkeypatch):
    platform = make_platform()
    cpu = platform.by_id(0)
    assert cpu_worker_count(cpu, engaged_count=5) == 35
    assert cpu_worker_count(cpu, engaged_count=100) == 1
    monkeypatch.setenv(CPU_WORKERS_ENV, "3")
    assert cpu_worker_count(cpu, engaged_count=5) == 3


# --- accelerator path ----------------------------------------------------------------

def test_accelerator_touches_only_its_chunk():
    kern = triad()
    platform = make_platform()
    dev = SimulatedDevice(platform.by_id(1))
    n = 12
    b = np.arange(n, dtype=float)
    c = np.ones(n)
    a = np.full(n, -1.0)
    host = {"a": a, "b": b, "c": c}
    run_on_accelerator(dev, kern, host, Chunk(4, 8))
    # oracle: sequential evaluation restricted to the chunk
    assert a[4:8].tolist() == [float(i) + 3.0 for i in range(4, 8)]
    assert np.all(a[:4] == -1.0) and np.all(a[8:] == -1.0)


def test_accelerator_never_reads_host_after_copy_in():
    kern = triad()
    platform = make_platform()
    dev = SimulatedDevice(platform.by_id(1))
    n = 8
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    expected = evaluate_sequential(kern, {"b": host["b"], "c": host["c"]})

    def poison(phase):
        if phase == "copied_in":
            host["b"][:] = np.nan
            host["c"][:] = np.nan

    run_on_accelerator(dev, kern, host, Chunk(0, n), phase_hook=poison)
    assert host["a"].tobytes() == expected["a"].tobytes()


def test_accelerator_charge_counts_transfers_and_compute():
    kern = triad()  # moves b, c, a in and a out: 4 slices
    platform = make_platform()
    dev = SimulatedDevice(platform.by_id(1))
    n = 2**17  # 1 MB per slice
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    charged = run_on_accelerator(dev, kern, host, Chunk(0, n))
    expected = dev.transfer_seconds(4 * n * 8) + dev.compute_seconds(n)
    assert charged == pytest.approx(expected)


def test_fill_has_zero_copy_in_volume():
    kern = kernel_of(FILL, {"scalar": 2.0})
    platform = make_platform()
    dev = SimulatedDevice(platform.by_id(1))
    n = 2**17
    host = {"a": np.zeros(n)}
    charged = run_on_accelerator(dev, kern, host, Chunk(0, n))
    expected = dev.transfer_seconds(n * 8) + dev.compute_seconds(n)  # out only
    assert charged == pytest.approx(expected)


def test_simulated_out_of_memory_names_unit():
    kern = triad()
    platform = make_platform()
    dev = SimulatedDevice(platform.by_id(1))  # 8 GB
    big = 2**30  # 3 buffers x 8 GB needed
    host = {"a": np.zeros(8), "b": np.zeros(8), "c": np.zeros(8)}
    with pytest.raises(DeviceMemoryError, match="pu 1"):
        run_on_accelerator(dev, kern, host, Chunk(0, big))


# --- execute ----------------------------------------------------------------------

def test_execute_triad_two_units_matches_oracle():
    platform = parse_pdl("""<platform name="p">
      <pu id="0" type="cpu" cores="4" threads="8" frequency_ghz="2" memory_gb="16"/>
      <pu id="1" type="gpu" cores="128" frequency_ghz="1" memory_gb="8"/>
    </platform>""")
    kern = triad()
    n = 2**16
    rng = np.random.default_rng(3)
    b, c = rng.random(n), rng.random(n)
    host = {"a": np.zeros(n), "b": b, "c": c}
    stats = execute(kern, host, platform, scheduling=UniformSchedule(4096))
    assert stats.total_chunks == 16  # 2**16 / 4096
    assert stats.total_elements == n
    expected = evaluate_sequential(kern, {"b": b, "c": c})
    assert host["a"].tobytes() == expected["a"].tobytes()


def test_execute_single_device_takes_all_chunks():
    platform = make_platform()
    kern = triad()
    n = 4096 * 4
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    stats = execute(kern, host, platform, DeviceIds((1,)),
                    UniformSchedule(4096))
    assert set(stats.per_pu) == {1}
    assert stats.per_pu[1].chunks_claimed == 4


def test_execute_single_element():
    platform = make_platform()
    kern = triad()
    host = {"a": np.zeros(1), "b": np.array([2.0]), "c": np.array([4.0])}
    stats = execute(kern, host, platform, scheduling=UniformSchedule(100))
    assert stats.total_chunks == 1
    assert host["a"][0] == 2.0 + 3.0 * 4.0


def test_execute_empty_arrays():
    platform = make_platform()
    kern = triad()
    host = {"a": np.zeros(0), "b": np.zeros(0), "c": np.zeros(0)}
    stats = execute(kern, host, platform, scheduling=UniformSchedule(10))
    assert stats.total_elements == 0
    assert stats.bytes_moved == 0


def test_execute_results_identical_across_runs():
    platform = make_platform()
    kern = triad()
    n = 50_000
    rng = np.random.default_rng(11)
    b, c = rng.random(n), rng.random(n)
    images = []
    for _ in range(3):
        host = {"a": np.zeros(n), "b": b.copy(), "c": c.copy()}
        execute(kern, host, platform, scheduling=UniformSchedule(997))
        images.append(host["a"].tobytes())
    assert images[0] == images[1] == images[2]


def test_execute_claim_log_monotone_and_disjoint():
    platform = make_platform()
    kern = triad()
    n = 40_000
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    stats = execute(kern, host, platform, scheduling=UniformSchedule(1024),
                    record_claims=True)
    log = stats.claim_log
    covered = 0
    for record in log:
        assert record.start == covered
        covered = record.finish
    assert covered == n


def test_execute_mismatched_lengths_rejected():
    platform = make_platform()
    kern = triad()
    host = {"a": np.zeros(4), "b": np.zeros(4), "c": np.zeros(5)}
    with pytest.raises(ConfigurationError, match="differ in length"):
        execute(kern, host, platform)


def test_execute_missing_array_rejected():
    platform = make_platform()
    kern = triad()
    with pytest.raises(ConfigurationError, match="needs array 'c'"):
        execute(kern, {"a": np.zeros(4), "b": np.zeros(4)}, platform)


def test_execute_per_device_gap_detected_before_start():
    platform = make_platform()
    kern = triad()
    host = {"a": np.zeros(8), "b": np.zeros(8), "c": np.zeros(8)}
    with pytest.raises(ConfigurationError):
        execute(kern, host, platform, DeviceIds((0, 1)),
                PerDeviceSchedule(((0, 4),)))


def test_execute_oom_propagates():
    platform = parse_pdl("""<platform name="p">
      <pu id="0" type="cpu" cores="2" threads="4" frequency_ghz="1" memory_gb="64"/>
      <pu id="1" type="gpu" cores="64" frequency_ghz="1" memory_gb="0.0001"/>
    </platform>""")
    kern = triad()
    n = 2**16
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    with pytest.raises(DeviceMemoryError, match="pu 1"):
        execute(kern, host, platform, DeviceIds((1,)),
                scheduling=UniformSchedule(n))


def test_first_controller_error_cancels_run():
    platform = make_platform()
    kern = triad()
    boom = RuntimeError("injected failure")
    original = kern.statements

    def exploding(env):
        raise boom

    kern.statements = ((original[0][0], exploding),)
    n = 8192
    host = {"a": np.zeros(n), "b": np.ones(n), "c": np.ones(n)}
    with pytest.raises(RuntimeError, match="injected failure"):
        execute(kern, host, platform, scheduling=UniformSchedule(64))


def test_int_kernel_c_division_semantics():
    src = """int a[8];
int b[8];
int s;
s = -7;
#pragma hstream in(b, s) out(a)
{
    a = b / s;
}
"""
    kern = kernel_of(src, {"s": -7})
    b = np.array([21, -21, 20, -20, 1, -1, 0, 6], dtype=np.int32)
    host = {"a": np.zeros(8, dtype=np.int32), "b": b}
    run_on_cpu(kern, host, Chunk(0, 8), 1)
    # C truncation toward zero
    assert host["a"].tolist() == [-3, 3, -2, 2, 0, 0, 0, 0]
