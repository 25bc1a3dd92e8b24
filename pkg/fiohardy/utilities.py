import csv
import json
import logging
from math import floor, log10

import numpy as np

from fiohardy.errors import ConfigurationError, StructuralError
from fiohardy.field import GridSpec, SampledField
from fiohardy.metric import SigmaGrid, SphereGrid
from fiohardy.tent import PhaseSpaceField


def output_data(data, filename):
    # Serializing json
    json_object = json.dumps(data, indent=4)

    with open(filename, "w") as outfile:
        outfile.write(json_object)


def import_data(filename):
    data = {}
    with open(filename, 'r') as file:
        data = json.load(file)
    return data


def sig_figs(x: float, precision: int):

    x = float(x)
    precision = int(precision)
    if x == 0.0 or x != x or abs(x) == float('inf'):
        return x
    return round(x, -int(floor(log10(abs(x)))) + (precision - 1))


def parse_value(text):
    text = text.strip()
    lowered = text.lower()
    if lowered in ('true', 'yes', 'on'):
        return True
    if lowered in ('false', 'no', 'off'):
        return False
    if lowered in ('inf', 'infinity'):
        return float('inf')
    if ',' in text:
        return [parse_value(part) for part in text.split(',') if part.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_flat_config(filename):
    """
    Read a flat key = value config file. Lines starting with # and blank
    lines are skipped, values become int, float, bool, lists (comma
    separated) or plain strings.
    """
    settings = {}
    with open(filename, 'r') as file:
        for number, line in enumerate(file, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigurationError(f"{filename}:{number}: expected 'key = value', got '{line}'")
            key, value = line.split('=', 1)
            key = key.strip()
            if not key:
                raise ConfigurationError(f"{filename}:{number}: missing key")
            settings[key] = parse_value(value)
    return settings


def write_csv(filename, header, rows):
    # repr keeps full float precision so reruns give identical files
    with open(filename, 'w', newline='') as outfile:
        writer = csv.writer(outfile, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def read_csv(filename):
    with open(filename, 'r', newline='') as infile:
        reader = csv.reader(infile)
        header = next(reader)
        return header, [row for row in reader]


def configure_logging(mc):
    # the library only logs, the console handler is installed by scripts and the CLI
    logger = logging.getLogger('fiohardy')
    logger.setLevel(logging.INFO if mc.logging_on else logging.WARNING)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('[%(levelname)s] [%(name)s]: %(message)s'))
        logger.addHandler(handler)
    return logger


# Binary dumps. Headers are little-endian u32 fields followed by the f64
# extent, payloads are complex128 (re, im pairs) in row-major order.
FIELD_MAGIC = b'FIOF'
PHASE_MAGIC = b'FIOP'
DUMP_VERSION = 1


def _read_dump(filename, magic):
    with open(filename, 'rb') as infile:
        raw = infile.read()
    if raw[:4] != magic:
        raise StructuralError(f"{filename}: bad magic {raw[:4]!r}, expected {magic!r}")
    return raw


def _take(raw, offset, dtype, count, filename):
    dtype = np.dtype(dtype)
    end = offset + dtype.itemsize * count
    if end > len(raw):
        raise StructuralError(f"{filename}: truncated at byte {len(raw)}, expected at least {end}")
    return np.frombuffer(raw, dtype=dtype, count=count, offset=offset), end


def write_field(filename, f):
    grid = f.grid
    header = np.array([DUMP_VERSION, grid.dim] + list(grid.shape), dtype='<u4')
    with open(filename, 'wb') as outfile:
        outfile.write(FIELD_MAGIC)
        outfile.write(header.tobytes())
        outfile.write(np.array([grid.extent], dtype='<f8').tobytes())
        outfile.write(np.ascontiguousarray(f.values, dtype='<c16').tobytes())


def read_field(filename):
    raw = _read_dump(filename, FIELD_MAGIC)
    (version, dim), offset = _take(raw, 4, '<u4', 2, filename)
    if version != DUMP_VERSION:
        raise StructuralError(f"{filename}: unsupported version {version}")
    sizes, offset = _take(raw, offset, '<u4', int(dim), filename)
    if len(set(sizes.tolist())) != 1:
        raise StructuralError(f"{filename}: non-cubic grid {sizes.tolist()}")
    (extent,), offset = _take(raw, offset, '<f8', 1, filename)
    grid = GridSpec(int(dim), int(sizes[0]), float(extent))
    values, offset = _take(raw, offset, '<c16', int(np.prod(grid.shape)), filename)
    if offset != len(raw):
        raise StructuralError(f"{filename}: {len(raw) - offset} trailing bytes")
    return SampledField(grid, values.reshape(grid.shape).copy())


def write_phase_field(filename, F):
    grid = F.grid
    header = np.array([DUMP_VERSION, grid.dim, grid.points_per_axis, F.sphere.size, F.sigmas.size], dtype='<u4')
    with open(filename, 'wb') as outfile:
        outfile.write(PHASE_MAGIC)
        outfile.write(header.tobytes())
        outfile.write(np.array([grid.extent], dtype='<f8').tobytes())
        outfile.write(np.ascontiguousarray(F.values, dtype='<c16').tobytes())


def read_phase_field(filename, sigma_min):
    """The sphere and sigma grids are rebuilt from (dim, A, J) and sigma_min."""
    raw = _read_dump(filename, PHASE_MAGIC)
    (version, dim, points, angles, levels), offset = _take(raw, 4, '<u4', 5, filename)
    if version != DUMP_VERSION:
        raise StructuralError(f"{filename}: unsupported version {version}")
    if levels < 2:
        raise StructuralError(f"{filename}: need a sub-unit level and the cap level, got J={levels}")
    (extent,), offset = _take(raw, offset, '<f8', 1, filename)
    grid = GridSpec(int(dim), int(points), float(extent))
    sphere = SphereGrid.uniform(int(dim), int(angles))
    sigmas = SigmaGrid.geometric(sigma_min, int(levels) - 1)
    shape = (int(angles), int(levels)) + grid.shape
    values, offset = _take(raw, offset, '<c16', int(np.prod(shape)), filename)
    if offset != len(raw):
        raise StructuralError(f"{filename}: {len(raw) - offset} trailing bytes")
    return PhaseSpaceField(grid, sphere, sigmas, values.reshape(shape).copy())
