import numpy as np
import pytest

import gridot as g
from gridot.io import MeasureFormatError, load_csv_measure, read_plan, write_plan

from conftest import random_instance


def test_load_basic(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("0,2\n1,3\n")
    m = load_csv_measure(f)
    assert m.shape.dims == (2, 2)
    assert m.masses.tolist() == [0, 2, 1, 3]


def test_load_ragged_row(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2\n3\n")
    with pytest.raises(MeasureFormatError) as exc:
        load_csv_measure(f)
    assert exc.value.line == 2


def test_load_negative_value(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,-2\n3,4\n")
    with pytest.raises(MeasureFormatError) as exc:
        load_csv_measure(f)
    assert exc.value.line == 1 and exc.value.column == 2


def test_load_non_integer(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2\n3,x\n")
    with pytest.raises(MeasureFormatError) as exc:
        load_csv_measure(f)
    assert exc.value.line == 2 and exc.value.column == 2


def test_load_empty_file(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("")
    with pytest.raises(MeasureFormatError):
        load_csv_measure(f)


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_csv_measure(tmp_path / "nope.csv")


def test_load_trailing_newlines_ok(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2\n3,4\n\n\n")
    assert load_csv_measure(f).masses.tolist() == [1, 2, 3, 4]


def test_load_benchmark_scale_image(tmp_path, rng):
    img = rng.integers(0, 10**5, (32, 32))
    f = tmp_path / "data32_1001.csv"
    np.savetxt(f, img, fmt="%d", delimiter=",")
    m = load_csv_measure(f)
    assert m.shape.dims == (32, 32)
    assert m.masses.size == 1024
    assert (m.masses.reshape(32, 32) == img).all()


def test_load_all_zero_image_is_accepted(tmp_path):
    f = tmp_path / "z.csv"
    f.write_text("0,0\n0,0\n")
    m = load_csv_measure(f)
    assert m.total == 0
    with pytest.raises(ValueError):
        g.balance(m, m)


# -- plan format ----------------------------------------------------------------

def test_plan_roundtrip(tmp_path, rng):
    inst = random_instance(rng, max_extent=6, max_mass=9)
    sol = g.solve_multiscale(inst)
    path = tmp_path / "plan.txt"
    write_plan(path, sol.plan)
    lines = path.read_text().splitlines()
    assert lines[0] == "# gridot-plan v1"
    assert lines[1].startswith("# source=")
    back = read_plan(path)
    assert back.source_shape == sol.plan.source_shape
    assert back.target_shape == sol.plan.target_shape
    assert list(back.entries()) == list(sol.plan.entries())
    assert g.plan_cost(back) == sol.cost


def test_plan_rejects_bad_header(tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("# not-a-plan\n# source=2 target=2\n0,0,1\n")
    with pytest.raises(ValueError):
        read_plan(f)
    f.write_text("# gridot-plan v1\nsource 2 target 2\n0,0,1\n")
    with pytest.raises(ValueError):
        read_plan(f)
