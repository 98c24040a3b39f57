# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Reading and writing of model checkpoints, result tables and JSON
documents.

Checkpoint layout (all integers little-endian)::

    b"BDUF"  u32 version  u32 tensor count
    per tensor:  u16 name length, UTF-8 name, u8 rank, rank x u64 dims,
                 float32 data
    u32 config length, UTF-8 JSON config echo
    u64 CRC-64/XZ of all preceding bytes

"""
import json
import os
import struct

import numpy as np

import bduf.settings as settings
from bduf.errors import CheckpointError

__all__ = ['save_checkpoint', 'load_checkpoint', 'checkpoint_bytes',
           'crc64', 'file_table_store', 'file_table_read', 'json_store',
           'json_read']

MAGIC = b'BDUF'
VERSION = 1


def _crc64_table():
    poly = 0xC96C5795D7870F42
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            if crc & 1:
                crc = (crc >> 1) ^ poly
            else:
                crc >>= 1
        table.append(crc)
    return table

_CRC64_TABLE = _crc64_table()
_MASK64 = 0xFFFFFFFFFFFFFFFF


def crc64(data):
    """CRC-64/XZ checksum of a bytes object."""
    crc = _MASK64
    table = _CRC64_TABLE
    for b in bytearray(data):
        crc = table[(crc ^ b) & 0xff] ^ (crc >> 8)
    return crc ^ _MASK64


def _config_echo(model):
    echo = {'model': model.config.to_dict(),
            'seed': model.seed,
            'vocab_hash': model.tokenizer.vocab_hash}
    if model.lineage is not None:
        echo['seed_lineage'] = model.lineage
    return json.dumps(echo, sort_keys=True, separators=(',', ':'))


def checkpoint_bytes(model):
    """The serialized checkpoint of `model` as bytes."""
    params = model.named_parameters()
    chunks = [struct.pack('<4sII', MAGIC, VERSION, len(params))]
    for name, p in params:
        bname = name.encode('utf-8')
        data = np.ascontiguousarray(p.data, dtype='<f4')
        chunks.append(struct.pack('<H', len(bname)) + bname)
        chunks.append(struct.pack('<B', data.ndim))
        chunks.append(struct.pack('<%dQ' % data.ndim, *data.shape))
        chunks.append(data.tobytes())
    config = _config_echo(model).encode('utf-8')
    chunks.append(struct.pack('<I', len(config)) + config)
    body = b''.join(chunks)
    return body + struct.pack('<Q', crc64(body))


def save_checkpoint(model, path):
    """
    Writes `model` to `path` in the bduf checkpoint format.

    Parameters
    ----------
    model : DualEncoder
        Model to store.  Parameters are stored as float32.
    path : str
        Output file.
    """
    blob = checkpoint_bytes(model)
    dirname = os.path.dirname(path)
    if dirname and not os.path.isdir(dirname):
        os.makedirs(dirname)
    with open(path, 'wb') as f:
        f.write(blob)
    if settings.debug:
        print("save_checkpoint: %s (%d bytes)" % (path, len(blob)))


class _Reader(object):

    def __init__(self, blob, path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.blob):
            raise CheckpointError("%s: truncated checkpoint" % self.path)
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))


def read_checkpoint(path):
    """
    Parses a checkpoint file without building a model.

    Returns
    -------
    tensors : list of (str, ndarray)
        Named float32 arrays in file order.
    config : dict
        The config echo.
    """
    with open(path, 'rb') as f:
        blob = f.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise CheckpointError("%s: not a bduf checkpoint (bad magic)" % path)
    if len(blob) < 12 + 4 + 8:
        raise CheckpointError("%s: truncated checkpoint" % path)
    r = _Reader(blob[:-8], path)
    r.take(4)
    version, count = r.unpack('<II')
    if version != VERSION:
        raise CheckpointError("%s: unsupported checkpoint version %d "
                              "(expected %d)" % (path, version, VERSION))
    tensors = []
    for _ in range(count):
        (nlen,) = r.unpack('<H')
        name = r.take(nlen).decode('utf-8')
        (rank,) = r.unpack('<B')
        dims = r.unpack('<%dQ' % rank)
        n = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(r.take(4 * n), dtype='<f4').astype(np.float32)
        tensors.append((name, data.reshape(dims)))
    (clen,) = r.unpack('<I')
    config = r.take(clen)
    if r.pos != len(r.blob):
        raise CheckpointError("%s: %d trailing bytes before checksum"
                              % (path, len(r.blob) - r.pos))
    (stored,) = struct.unpack('<Q', blob[-8:])
    if stored != crc64(blob[:-8]):
        raise CheckpointError("%s: checksum mismatch" % path)
    try:
        config = json.loads(config.decode('utf-8'))
    except ValueError:
        raise CheckpointError("%s: config echo is not valid JSON" % path)
    return tensors, config


def load_checkpoint(path, expected=None):
    """
    Reads a checkpoint written by :func:`save_checkpoint`.

    Parameters
    ----------
    path : str
        Checkpoint file.
    expected : ModelConfig
        When given, the config echo must match these dimensions.

    Returns
    -------
    model : DualEncoder
        The stored model with trainable float32 parameters.
    """
    from bduf.encoders import DualEncoder
    from bduf.options import ModelConfig
    from bduf.errors import ConfigError

    tensors, echo = read_checkpoint(path)
    try:
        config = ModelConfig.from_dict(echo['model'])
    except (KeyError, ConfigError) as e:
        raise CheckpointError("%s: bad model config echo (%s)" % (path, e))
    if expected is not None:
        mine, theirs = config.to_dict(), expected.to_dict()
        for key in sorted(theirs):
            if mine.get(key) != theirs[key]:
                raise CheckpointError(
                    "%s: %s mismatch: checkpoint has %s, expected %s"
                    % (path, key, mine.get(key), theirs[key]))
    model = DualEncoder(config, seed=echo.get('seed', 0))
    if echo.get('vocab_hash') != model.tokenizer.vocab_hash:
        raise CheckpointError("%s: vocabulary hash mismatch" % path)
    registry = [k for k, _ in model.named_parameters()]
    names = [k for k, _ in tensors]
    if names != registry:
        missing = sorted(set(registry) - set(names))
        extra = sorted(set(names) - set(registry))
        raise CheckpointError("%s: parameter names do not match the model "
                              "registry (missing: %s, unexpected: %s)"
                              % (path, missing, extra))
    for (name, data), (_, p) in zip(tensors, model.named_parameters()):
        if data.shape != p.shape:
            raise CheckpointError("%s: %s has shape %s, config echo implies "
                                  "%s" % (path, name, data.shape, p.shape))
    model.load_state_dict(dict(tensors))
    model.lineage = echo.get('seed_lineage')
    return model


# -----------------------------------------------------------------------------
# Tables
#
def _format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.10g" % v
    return str(v)


def file_table_store(filename, header, rows, sep=","):
    """
    Stores a table with a header line to a delimited text file.

    Parameters
    ----------
    filename : str
        Name of the output file, including extension.
    header : list of str
        Column names.
    rows : list of sequences
        Table rows; numbers are written with 10 significant digits.
    sep : str
        Single-character field separator.
    """
    if filename is None or header is None:
        raise ValueError("filename or header is unspecified")
    N = len(header)
    with open(filename, "w") as f:
        f.write(sep.join(header) + "\n")
        for m, row in enumerate(rows):
            if len(row) != N:
                raise ValueError("row %d has %d columns, header has %d"
                                 % (m, len(row), N))
            cells = [_format_cell(v) for v in row]
            for c in cells:
                if sep in c:
                    raise ValueError("cell %r contains the separator" % c)
            f.write(sep.join(cells) + "\n")


def _parse_cell(item):
    try:
        return int(item)
    except ValueError:
        pass
    try:
        return float(item)
    except ValueError:
        return item


def file_table_read(filename, sep=None):
    """
    Reads a table written by :func:`file_table_store`.

    Parameters
    ----------
    filename : str
        Name of the file.
    sep : str
        Separator; detected from the header line when omitted.

    Returns
    -------
    header : list of str
    rows : list of lists
        Cells parsed as int, float or str.
    """
    if filename is None:
        raise ValueError("filename is unspecified")
    with open(filename, "r") as f:
        lines = [line.rstrip("\n") for line in f
                 if line.strip() and line[0] not in "#%"]
    if not lines:
        raise ValueError("%s: empty table" % filename)
    if sep is None:
        for cand in (",", ";", "\t", "|"):
            if len(lines[0].split(cand)) > 1:
                sep = cand
                break
        else:
            raise ValueError("Unrecognized column delimiter")
    header = lines[0].split(sep)
    rows = []
    for line in lines[1:]:
        cells = line.split(sep)
        if len(cells) != len(header):
            raise ValueError("Badly formatted table: unequal number of "
                             "columns")
        rows.append([_parse_cell(c) for c in cells])
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return dict((str(k), _jsonable(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def json_store(filename, data):
    """Writes a JSON document with sorted keys."""
    dirname = os.path.dirname(filename)
    if dirname and not os.path.isdir(dirname):
        os.makedirs(dirname)
    with open(filename, "w") as f:
        json.dump(_jsonable(data), f, sort_keys=True, indent=4)
        f.write("\n")


def json_read(filename):
    with open(filename, "r") as f:
        return json.load(f)
