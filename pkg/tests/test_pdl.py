"""Platform description parsing, validation, and device resolution."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hstream import errors
from hstream.errors import PdlError, ResolveError
from hstream.ir import ALL_DEVICES, DeviceIds
from hstream.pdl import PuKind, parse_pdl, resolve_devices
from tests.conftest import DISA_PDL

MINIMAL = '<platform name="one"><pu id="0" type="cpu" cores="2" threads="4" frequency_ghz="1.0" memory_gb="4"/></platform>'


def test_disa_platform_shape():
    platform = parse_pdl(DISA_PDL)
    assert platform.name == "DISA"
    assert len(platform.pus) == 5
    cpu = platform.by_id(0)
    assert cpu.kind is PuKind.CPU
    assert (cpu.cores, cpu.threads) == (20, 40)
    assert cpu.cache_mb == 27.5
    assert cpu.frequency_ghz == 2.4
    assert cpu.memory_gb == 768
    for pu_id in (1, 2, 3, 4):
        gpu = platform.by_id(pu_id)
        assert gpu.kind is PuKind.GPU
        assert gpu.cores == 1792
        assert gpu.threads is None
        assert gpu.frequency_ghz == 1.48
        assert gpu.memory_gb == 8


def test_minimal_single_cpu_platform():
    platform = parse_pdl(MINIMAL)
    assert [pu.id for pu in platform.pus] == [0]


def test_parse_is_deterministic():
    assert parse_pdl(DISA_PDL) == parse_pdl(DISA_PDL)


def test_sim_defaults_by_kind():
    text = """<platform name="p">
      <pu id="0" type="cpu" cores="2" threads="2" frequency_ghz="1" memory_gb="4"/>
      <pu id="1" type="gpu" cores="128" frequency_ghz="1" memory_gb="8"/>
      <pu id="2" type="mic" cores="61" frequency_ghz="1" memory_gb="16"/>
    </platform>"""
    platform = parse_pdl(text)
    assert (platform.by_id(0).speed_factor, platform.by_id(0).transfer_cost_per_mb) == (1.0, 0.0)
    assert (platform.by_id(1).speed_factor, platform.by_id(1).transfer_cost_per_mb) == (4.0, 0.001)
    assert (platform.by_id(2).speed_factor, platform.by_id(2).transfer_cost_per_mb) == (2.0, 0.002)


def test_sim_element_overrides_defaults():
    text = """<platform name="p">
      <pu id="0" type="cpu" cores="2" threads="2" frequency_ghz="1" memory_gb="4">
        <sim speed_factor="2.5" transfer_cost_per_mb="0.5"/>
      </pu>
    </platform>"""
    pu = parse_pdl(text).by_id(0)
    assert pu.speed_factor == 2.5
    assert pu.transfer_cost_per_mb == 0.5


def test_tdp_accepted_and_ignored():
    text = MINIMAL.replace('memory_gb="4"', 'memory_gb="4" tdp_w="150"')
    assert parse_pdl(text).by_id(0).tdp_w == 150.0


def test_duplicate_id_reports_line_and_code():
    text = """<platform name="p">
      <pu id="0" type="cpu" cores="2" threads="2" frequency_ghz="1" memory_gb="4"/>
      <pu id="0" type="gpu" cores="64" frequency_ghz="1" memory_gb="8"/>
    </platform>"""
    with pytest.raises(PdlError) as err:
        parse_pdl(text)
    (diag,) = err.value.diagnostics
    assert diag.code == errors.PDL_DUP_ID
    assert diag.line == 3


def test_missing_required_attribute_names_it():
    text = '<platform name="p"><pu id="0" type="cpu" cores="2" threads="2" memory_gb="4"/></platform>'
    with pytest.raises(PdlError) as err:
        parse_pdl(text)
    assert err.value.codes == [errors.PDL_ATTR]
    assert "frequency_ghz" in err.value.diagnostics[0].message


def test_threads_required_only_for_cpu():
    no_cpu_threads = '<platform name="p"><pu id="0" type="cpu" cores="2" frequency_ghz="1" memory_gb="4"/></platform>'
    with pytest.raises(PdlError):
        parse_pdl(no_cpu_threads)
    gpu_ok = """<platform name="p">
      <pu id="0" type="cpu" cores="2" threads="2" frequency_ghz="1" memory_gb="4"/>
      <pu id="1" type="gpu" cores="64" frequency_ghz="1" memory_gb="8"/>
    </platform>"""
    assert parse_pdl(gpu_ok).by_id(1).threads is None


def test_cpu_threads_must_cover_cores():
    text = '<platform name="p"><pu id="0" type="cpu" cores="8" threads="4" frequency_ghz="1" memory_gb="4"/></platform>'
    with pytest.raises(PdlError) as err:
        parse_pdl(text)
    assert err.value.codes == [errors.PDL_VALUE]


def test_non_numeric_attribute():
    text = MINIMAL.replace('cores="2"', 'cores="two"')
    with pytest.raises(PdlError) as err:
        parse_pdl(text)
    assert err.value.codes == [errors.PDL_VALUE]
    assert "cores" in err.value.diagnostics[0].message


def test_zero_pus_rejected():
    with pytest.raises(PdlError) as err:
        parse_pdl('<platform name="p"></platform>')
    assert err.value.codes == [errors.PDL_EMPTY]


def test_platform_without_cpu_rejected():
    text = '<platform name="p"><pu id="1" type="gpu" cores="64" frequency_ghz="1" memory_gb="8"/></platform>'
    with pytest.raises(PdlError) as err:
        parse_pdl(text)
    assert err.value.codes == [errors.PDL_NO_CPU]


def test_malformed_xml_has_position():
    with pytest.raises(PdlError) as err:
        parse_pdl('<platform name="p">\n  <pu id="0"\n</platform>')
    assert err.value.codes == [errors.PDL_XML]
    assert err.value.diagnostics[0].line >= 2


def test_resolve_all_preserves_file_order():
    platform = parse_pdl(DISA_PDL)
    assert [pu.id for pu in resolve_devices(platform, ALL_DEVICES)] == [0, 1, 2, 3, 4]


def test_resolve_id_list_order_and_subset():
    platform = parse_pdl(DISA_PDL)
    picked = resolve_devices(platform, DeviceIds((2, 0, 4)))
    assert [pu.id for pu in picked] == [2, 0, 4]


def test_resolve_unknown_id():
    platform = parse_pdl(DISA_PDL)
    with pytest.raises(ResolveError, match="unknown device id 9"):
        resolve_devices(platform, DeviceIds((9,)))


def test_resolve_rejects_duplicates_and_empty():
    platform = parse_pdl(DISA_PDL)
    with pytest.raises(ResolveError):
        resolve_devices(platform, DeviceIds((1, 1)))
    with pytest.raises(ResolveError):
        resolve_devices(platform, DeviceIds(()))


@given(st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=6,
                unique=True))
def test_resolve_succeeds_iff_subset(ids):
    platform = parse_pdl(DISA_PDL)
    known = set(platform.ids)
    selector = DeviceIds(tuple(ids))
    if set(ids) <= known:
        assert [pu.id for pu in resolve_devices(platform, selector)] == ids
    else:
        with pytest.raises(ResolveError):
            resolve_devices(platform, selector)
