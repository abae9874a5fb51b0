"""Shared fixtures: repository paths, a reference platform, compiled kernels."""

from pathlib import Path

import pytest

from hstream.frontend import compile_source
from hstream.pdl import parse_pdl
from hstream.runtime import ExecutableKernel

REPO = Path(__file__).resolve().parent.parent
DEMOS = REPO / "demos"
PROGRAMS = DEMOS / "programs"
PLATFORMS = DEMOS / "platforms"
GOLDEN = Path(__file__).resolve().parent / "golden"
INVALID = Path(__file__).resolve().parent / "corpus" / "invalid"

TRIAD_SOURCE = """\
double a[1048576];
double b[1048576];
double c[1048576];
double scalar;

scalar = 3.0;

#pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
{
    a = b+scalar*c;
}
"""

DISA_PDL = """\
<platform name="DISA">
  <pu id="0" type="cpu" cores="20" threads="40" cache_mb="27.5" frequency_ghz="2.4" memory_gb="768"/>
  <pu id="1" type="gpu" cores="1792" frequency_ghz="1.48" memory_gb="8"/>
  <pu id="2" type="gpu" cores="1792" frequency_ghz="1.48" memory_gb="8"/>
  <pu id="3" type="gpu" cores="1792" frequency_ghz="1.48" memory_gb="8"/>
  <pu id="4" type="gpu" cores="1792" frequency_ghz="1.48" memory_gb="8"/>
</platform>
"""


@pytest.fixture(scope="session")
def disa():
    return parse_pdl(DISA_PDL)


@pytest.fixture(scope="session")
def triad_spec():
    return compile_source(TRIAD_SOURCE, "Triad").kernels[0]


@pytest.fixture()
def triad_kernel(triad_spec):
    return ExecutableKernel.from_kernel_spec(triad_spec, {"scalar": 3.0})
