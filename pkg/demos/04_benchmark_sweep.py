#!/usr/bin/env python3
"""A small verified throughput sweep.

Runs TRIAD and FILL at 8 MB with two chunk sizes across three device
configurations, every run checked bitwise against a sequential pass, then
prints the summary CSV and the per-kernel configuration comparison. The
shipped desk and full-scale plans follow the same structure, larger.
"""

from pathlib import Path

from hstream.bench import (
    ExperimentPlan,
    config_means,
    run_experiment,
    summarize,
)
from hstream.pdl import parse_pdl_file

HERE = Path(__file__).resolve().parent


def main():
    platform = parse_pdl_file(HERE / "platforms" / "disa.pdl")
    plan = ExperimentPlan(
        kernels=("TRIAD", "FILL"),
        stream_sizes_mb=(32,),
        chunk_sizes_mb=(0.125,),
        device_configs=("CPU", "4GPUs", "CPU+4GPUs"),
        repeats=2,
    )
    print(f"running {plan.cells} cells x {plan.repeats} repeats "
          f"(every run verified against a sequential pass)...")
    rows = run_experiment(plan, platform)

    print("\nsummary csv:")
    print(summarize(rows))

    print("per-kernel configuration comparison (mean MB/s):")
    means = config_means(rows)
    for kernel in plan.kernels:
        cpu = means[(kernel, "CPU")]
        gpus = means[(kernel, "4GPUs")]
        both = means[(kernel, "CPU+4GPUs")]
        print(f"  {kernel:6s} CPU={cpu:7.1f}  4GPUs={gpus:7.1f}  "
              f"CPU+4GPUs={both:7.1f}  (combined/best single: "
              f"{both / max(cpu, gpus):.2f}x)")


if __name__ == "__main__":
    main()
