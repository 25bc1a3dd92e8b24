import numpy as np
import pytest

from fiohardy.constants import Constants
from fiohardy.errors import ConfigurationError, StructuralError
from fiohardy.field import GridSpec
from fiohardy.utilities import (output_data, read_csv, read_field, read_flat_config, read_phase_field,
                                sig_figs, write_csv, write_field, write_phase_field)

from conftest import SIGMA_MIN


def test_flat_config_types(tmp_path):
    path = tmp_path / 'plan.cfg'
    path.write_text("# plan\nangles = 32\nsigma_min = 0.0625\nbump = skewed  # second bump\n"
                    "logging_on = yes\nlambdas = 4, 8, 16, 32\n\n")
    settings = read_flat_config(str(path))
    assert settings == {'angles': 32, 'sigma_min': 0.0625, 'bump': 'skewed', 'logging_on': True,
                        'lambdas': [4, 8, 16, 32]}


def test_flat_config_names_bad_line(tmp_path):
    path = tmp_path / 'bad.cfg'
    path.write_text("angles = 32\nsigma_min 0.1\n")
    with pytest.raises(ConfigurationError, match=':2:'):
        read_flat_config(str(path))


def test_constants_from_files(tmp_path):
    flat = tmp_path / 'exp.cfg'
    flat.write_text("points_per_axis = 64\nt = 2\n")
    mc = Constants.from_file(str(flat))
    assert mc.points_per_axis == 64
    assert mc.t == 2.0
    data = tmp_path / 'exp.json'
    output_data({'angles': 32, 'seed': 5}, str(data))
    mc = Constants.from_file(str(data))
    assert (mc.angles, mc.seed) == (32, 5)


def test_constants_survive_a_json_dump(tmp_path):
    mc = Constants()
    mc.update_from_dictionary({'angles': 16, 'lambdas': [2.0, 4.0], 'logging_on': True})
    path = tmp_path / 'constants.json'
    output_data(mc.as_dict(), str(path))
    assert Constants.from_file(str(path)).as_dict() == mc.as_dict()


def test_constants_reject_bad_settings():
    mc = Constants()
    with pytest.raises(ConfigurationError):
        mc.update_from_dictionary({'horizon': 3})
    with pytest.raises(ConfigurationError):
        mc.update_from_dictionary({'points_per_axis': 33})
    with pytest.raises(ConfigurationError):
        mc.update_from_dictionary({'angles': 2.5})


def test_csv_is_byte_identical_on_rewrite(tmp_path):
    rows = [('a', 0.1, 3), ('b', 1.0 / 3.0, 4)]
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    write_csv(str(first), ['name', 'value', 'count'], rows)
    write_csv(str(second), ['name', 'value', 'count'], rows)
    assert first.read_bytes() == second.read_bytes()
    header, read = read_csv(str(first))
    assert header == ['name', 'value', 'count']
    assert float(read[1][1]) == 1.0 / 3.0


def test_sig_figs():
    assert sig_figs(0.0123456, 3) == 0.0123
    assert sig_figs(98765.0, 2) == 99000.0
    assert sig_figs(0.0, 3) == 0.0


def test_field_dump(tmp_path, grid, random_field):
    f = random_field(grid, 4)
    path = str(tmp_path / 'f.fiof')
    write_field(path, f)
    g = read_field(path)
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)
    g.values[0, 0] = 0.0


def test_field_dump_errors(tmp_path, grid, random_field):
    path = tmp_path / 'f.fiof'
    write_field(str(path), random_field(grid))
    raw = path.read_bytes()
    (tmp_path / 'short.fiof').write_bytes(raw[:-16])
    with pytest.raises(StructuralError):
        read_field(str(tmp_path / 'short.fiof'))
    (tmp_path / 'magic.fiof').write_bytes(b'FIOX' + raw[4:])
    with pytest.raises(StructuralError):
        read_field(str(tmp_path / 'magic.fiof'))


def test_phase_field_dump(tmp_path, random_phase_field):
    F = random_phase_field(GridSpec(2, 16), 8, 4)
    path = str(tmp_path / 'F.fiop')
    write_phase_field(path, F)
    G = read_phase_field(path, SIGMA_MIN)
    assert G.values.shape == F.values.shape
    assert np.array_equal(G.values, F.values)
    assert np.allclose(G.sigmas.levels, F.sigmas.levels)
    with pytest.raises(StructuralError):
        read_field(path)
