import json
from os import listdir, makedirs
from os.path import isdir, isfile, join

import numpy as np
import pandas as pd

__all__ = ['format_value', 'list_files', 'list_scenarios', 'ensure_dir', 'write_table',
           'write_json', 'read_json']

FLOAT_FORMAT = '{:.12g}'


def format_value(value):
    """CSV text of one cell: 12 significant digits for reals, empty for None or nan."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '' if np.isnan(value) else FLOAT_FORMAT.format(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def list_files(loc, return_dirs=False, return_files=True, recursive=False, valid_exts=None):
    """
    Return a sorted list of the paths within a directory loc.

    Inputs:
        loc - Path to directory to list files from.
        return_dirs - If true, returns directory paths in loc. (default: False)
        return_files - If true, returns file paths in loc. (default: True)
        recursive - If true, searches directories recursively. (default: False)
        valid_exts - If a list, only returns files with extensions in list. If None,
            does nothing. (default: None)

    Outputs:
        files - Directories first, then files, each sorted by path.
    """

    entries = sorted(join(loc, x) for x in listdir(loc))
    dirs = [x for x in entries if isdir(x)]
    files = [x for x in entries if isfile(x)] if return_files else []

    found_dirs = list(dirs) if return_dirs else []
    if recursive:
        for d in dirs:
            deeper = list_files(d, return_dirs=return_dirs, return_files=return_files,
                                recursive=True, valid_exts=valid_exts)
            found_dirs.extend(x for x in deeper if isdir(x))
            files.extend(x for x in deeper if isfile(x))

    if isinstance(valid_exts, (list, tuple)):
        files = [f for f in files if f.endswith(tuple(valid_exts))]

    return sorted(found_dirs) + sorted(files)


def list_scenarios(loc, recursive=True):
    """
    Scenario documents (*.json) under loc; a path to a single file is returned as is.
    """

    if isfile(loc):
        return [loc]
    return list_files(loc, recursive=recursive, valid_exts=['.json'])


def ensure_dir(loc):
    """Create loc (and parents) if missing and return it."""
    makedirs(loc, exist_ok=True)
    return loc


def write_table(path, rows, columns):
    """
    Write rows (a list of dicts) as CSV with the given column order.

    Floats are written with 12 significant digits and missing values as empty
    fields, so identical inputs give byte-identical files.
    """

    columns = list(columns)
    frame = pd.DataFrame([[format_value(row.get(c)) for c in columns] for row in rows], columns=columns,
                         dtype=object)
    frame.to_csv(path, index=False, lineterminator='\n')
    return path


def write_json(path, payload):
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write('\n')
    return path


def read_json(path):
    with open(path, 'r', encoding='utf-8') as fh:
        return json.load(fh)
