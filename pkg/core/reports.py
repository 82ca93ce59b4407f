"""Report files: versioned CSV tables, two-column plot series and output paths"""


import csv
import os
import re
import numpy as np
from . import log_utils
from ._version import __version__

module_logger = log_utils.logger


def version_header():
    return '# gevreych {0}'.format(__version__)


def _cell(value):
    # repr keeps every digit, so identical runs give identical files
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return repr(value)
    return '' if value is None else str(value)


def get_outname(directory, stem, suffix='', ext='csv', overwrite=False):
    """Path of an output file in directory

    Arguments:
    -----------
    directory : str
        created when missing
    stem : str
        base name, characters outside [A-Za-z0-9._-] are replaced by '_'
    suffix : str, optional (default : '')
        appended to the stem with an underscore
    ext : str, optional (default : 'csv')
    overwrite : bool, optional (default : False)
        if False a counter is appended until the name is free

    Returns:
    -----------
    out : str
        normalised path
    """
    if not os.path.isdir(directory):
        os.makedirs(directory, exist_ok=True)
    basename = re.sub('[^A-Za-z0-9._-]', '_', stem)
    if suffix != '' and not suffix.startswith('_'):
        suffix = '_' + suffix
    if ext != '' and not ext.startswith('.'):
        ext = '.' + ext
    if overwrite:
        return os.path.normpath(os.path.join(directory, basename + suffix + ext))
    count = 0
    while True:
        path = os.path.normpath(os.path.join(directory, ''.join([basename, suffix, '' if count == 0 else str(count), ext])))
        if os.path.exists(path):
            count += 1
        else:
            return path


def write_csv(filename, header, rows):
    """CSV with the version line, a header row and one row per record"""
    with open(filename, 'w', newline='') as fp:
        fp.write(version_header() + '\n')
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    module_logger.info('   written {0}'.format(filename))
    return filename


def read_csv(filename):
    """Header and rows (as strings) of a file written by write_csv"""
    with open(filename, 'r', newline='') as fp:
        lines = [line for line in fp if not line.startswith('#')]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]


def write_reports(filename, reports):
    """CSV of InequalityReport records"""
    if not reports:
        header = ['check', 'sigma', 's', 'delta', 'delta_prime', 'lhs', 'rhs', 'margin', 'holds']
    else:
        header = reports[0].csv_header
    return write_csv(filename, header, [r.as_row() for r in reports])


def write_series(filename, x, y):
    """Whitespace separated two-column series for plotting"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError('series columns differ in length: {0} and {1}'.format(x.size, y.size))
    with open(filename, 'w') as fp:
        for a, b in zip(x, y):
            fp.write('{0!r} {1!r}\n'.format(float(a), float(b)))
    module_logger.info('   written {0}'.format(filename))
    return filename
