"""
Utility functions for the selfdecomp command line.
Float formatting, grid parsing, CSV and JSON-lines writers, and the default
seed taken from the environment.
"""

import csv
import json
import math
import os

import numpy as np

from errors import ConfigError

SEED_ENV = "SELFDECOMP_SEED"
DEFAULT_SEED = 12345
FLOAT_FORMAT = ".17g"


def format_float(x):
    """17 significant digits, enough to round-trip any double"""
    return format(float(x), FLOAT_FORMAT)


def parse_grid(text):
    """
    Parse a grid given either as comma separated values ("0.5,1,2") or as
    "start:stop:num", expanded like numpy.linspace.

    Returns:
        A list of finite floats
    """
    text = text.strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            grid = np.linspace(float(start), float(stop), int(num)).tolist()
        else:
            grid = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise ConfigError(f"malformed grid {text!r}: {exc}") from None
    if not grid:
        raise ConfigError(f"grid {text!r} is empty")
    if not all(math.isfinite(x) for x in grid):
        raise ConfigError(f"grid {text!r} has non-finite points")
    return grid


def resolve_seed(seed=None, environ=None):
    """
    The explicit seed if given, else SELFDECOMP_SEED from the environment,
    else DEFAULT_SEED. Seeds are unsigned 64-bit integers.
    """
    environ = os.environ if environ is None else environ
    if seed is None:
        raw = environ.get(SEED_ENV)
        if raw is None:
            return DEFAULT_SEED
        try:
            seed = int(raw, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must lie in [0, 2**64), got {seed!r}")
    return seed


def write_comments(stream, comments):
    """Write '# key: value' lines; values that are not strings go out as JSON"""
    for key, value in comments.items():
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
        stream.write(f"# {key}: {text}\n")


def write_csv(stream, comments, columns, rows):
    """
    Comment block, header row, then data rows. Floats are written with
    format_float; other cells as str().
    """
    write_comments(stream, comments)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(cell) if isinstance(cell, float) else cell for cell in row])


def write_json_lines(stream, records):
    for record in records:
        stream.write(json.dumps(record, sort_keys=True) + "\n")
