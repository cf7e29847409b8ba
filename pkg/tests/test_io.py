"""Round-trip tests for the flat binary field container."""

import json

import numpy as np
import pytest

from fermifield.grid import GridSpec, ScalarField, SpinorField, VectorField
from fermifield.io import MAGIC, read_field, write_field


@pytest.fixture
def grid():
    return GridSpec(d=2, N=8, L=2.0)


def _random_data(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_scalar_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(0)
    field = ScalarField(grid, _random_data(rng, grid.shape))
    path = tmp_path / "s.field"
    write_field(path, field)
    back = read_field(path)
    assert isinstance(back, ScalarField)
    assert back.grid == grid
    np.testing.assert_array_equal(back.data, field.data)


def test_vector_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(1)
    field = VectorField(grid, _random_data(rng, (grid.d,) + grid.shape))
    path = tmp_path / "v.field"
    write_field(path, field)
    back = read_field(path)
    assert isinstance(back, VectorField)
    np.testing.assert_array_equal(back.data, field.data)


def test_spinor_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(2)
    field = SpinorField(grid, _random_data(rng, (2,) + grid.shape))
    path = tmp_path / "u.field"
    write_field(path, field)
    back = read_field(path)
    assert isinstance(back, SpinorField)
    np.testing.assert_array_equal(back.data, field.data)


def test_spinor_disambiguated_by_sidecar(tmp_path):
    # a 2-component field on a d=2 grid is ambiguous without the sidecar kind
    grid = GridSpec(d=2, N=8, L=2.0)
    rng = np.random.default_rng(3)
    field = SpinorField(grid, _random_data(rng, (2,) + grid.shape))
    path = tmp_path / "a.field"
    write_field(path, field)
    assert isinstance(read_field(path), SpinorField)
    # without the sidecar the ncomp == d rule wins
    path.with_suffix(path.suffix + ".json").unlink()
    assert isinstance(read_field(path), VectorField)


def test_single_precision_storage(tmp_path, grid):
    rng = np.random.default_rng(4)
    field = ScalarField(grid, _random_data(rng, grid.shape))
    path = tmp_path / "f32.field"
    write_field(path, field, single=True)
    back = read_field(path)
    assert back.data.dtype == np.complex128
    np.testing.assert_allclose(back.data, field.data, rtol=1e-6)
    # complex64 payload is half the size of the double version
    path2 = tmp_path / "f64.field"
    write_field(path2, field)
    assert path.stat().st_size - 32 == (path2.stat().st_size - 32) // 2


def test_sidecar_contents(tmp_path, grid):
    field = ScalarField(grid, np.ones(grid.shape))
    path = tmp_path / "meta.field"
    write_field(path, field, units="energy", provenance={"run": 7})
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    assert side["units"] == "energy"
    assert side["kind"] == "ScalarField"
    assert side["provenance"] == {"run": 7}


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.field"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        read_field(path)


def test_bad_dtype_code_rejected(tmp_path, grid):
    field = ScalarField(grid, np.ones(grid.shape))
    path = tmp_path / "code.field"
    write_field(path, field)
    raw = bytearray(path.read_bytes())
    raw[28] = 9  # dtype code byte
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="dtype"):
        read_field(path)


def test_magic_encodes_version():
    assert MAGIC.endswith(b"\x01")
    assert len(MAGIC) == 8
