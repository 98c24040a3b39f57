# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import os

import numpy as np
from numpy.testing import (assert_, assert_equal, assert_allclose,
                           assert_raises)

from bduf.errors import CheckpointError
from bduf.fileio import (save_checkpoint, load_checkpoint, checkpoint_bytes,
                         crc64, file_table_store, file_table_read,
                         json_store, json_read)
from bduf.options import ModelConfig
from bduf.seeding import SeedLineage

from bduf.tests.common import tiny_model, tiny_model_config


class TestCheckpoint:
    """
    Binary checkpoint codec.
    """

    def test_crc64(self):
        "fileio: CRC-64/XZ check value"
        assert_equal(crc64(b"123456789"), 0x995DC9BBDF1939FA)

    def test_roundtrip(self, tmp_path):
        "fileio: save, load and save again gives identical bytes"
        m = tiny_model(seed=3)
        m.lineage = SeedLineage(3).to_dict()
        path = str(tmp_path / "m.bduf")
        save_checkpoint(m, path)
        m2 = load_checkpoint(path, expected=tiny_model_config())
        assert_equal(checkpoint_bytes(m2), checkpoint_bytes(m))
        assert_equal(m2.lineage, m.lineage)
        assert_allclose(m2.embed_text(["a ball"]), m.embed_text(["a ball"]))

    def test_same_seed_bytes(self):
        "fileio: same-seed models serialize to identical bytes"
        assert_equal(checkpoint_bytes(tiny_model(seed=9)),
                     checkpoint_bytes(tiny_model(seed=9)))

    def _corrupt(self, tmp_path, func):
        path = str(tmp_path / "m.bduf")
        save_checkpoint(tiny_model(), path)
        with open(path, 'rb') as f:
            blob = bytearray(f.read())
        with open(path, 'wb') as f:
            f.write(bytes(func(blob)))
        return path

    def test_bad_magic(self, tmp_path):
        "fileio: wrong magic is rejected"
        def f(b):
            b[0:4] = b"XXXX"
            return b
        assert_raises(CheckpointError, load_checkpoint,
                      self._corrupt(tmp_path, f))

    def test_bad_version(self, tmp_path):
        "fileio: unknown version is rejected"
        def f(b):
            b[4] = 7
            return b
        assert_raises(CheckpointError, load_checkpoint,
                      self._corrupt(tmp_path, f))

    def test_truncated(self, tmp_path):
        "fileio: truncated file is rejected"
        assert_raises(CheckpointError, load_checkpoint,
                      self._corrupt(tmp_path, lambda b: b[:len(b) // 2]))

    def test_flipped_byte(self, tmp_path):
        "fileio: a flipped payload byte fails the checksum"
        def f(b):
            b[len(b) // 2] ^= 0x01
            return b
        assert_raises(CheckpointError, load_checkpoint,
                      self._corrupt(tmp_path, f))

    def test_config_mismatch(self, tmp_path):
        "fileio: config echo must match the expected model"
        path = str(tmp_path / "m.bduf")
        save_checkpoint(tiny_model(), path)
        other = ModelConfig(embed_dim=8, width=32, depth=1, mlp_ratio=2,
                            token_mix_hidden=8)
        try:
            load_checkpoint(path, expected=other)
        except CheckpointError as e:
            assert_("width mismatch" in str(e))
        else:
            assert_(False, "no CheckpointError raised")


class TestTables:
    """
    Delimited tables and JSON documents.
    """

    def test_table_roundtrip(self, tmp_path):
        "fileio: table written and read back"
        path = str(tmp_path / "t.csv")
        rows = [[1, 0, 0.125], [2, 1, 3.5]]
        file_table_store(path, ['count', 'repetition', 'seconds'], rows)
        header, back = file_table_read(path)
        assert_equal(header, ['count', 'repetition', 'seconds'])
        assert_equal(back, rows)

    def test_table_separator(self, tmp_path):
        "fileio: separator detected from the header"
        path = str(tmp_path / "t.tsv")
        file_table_store(path, ['a', 'b'], [['x', 1]], sep="\t")
        assert_equal(file_table_read(path), (['a', 'b'], [['x', 1]]))

    def test_table_width(self, tmp_path):
        "fileio: rows must match the header"
        assert_raises(ValueError, file_table_store,
                      str(tmp_path / "t.csv"), ['a', 'b'], [[1]])

    def test_json_numpy(self, tmp_path):
        "fileio: numpy scalars and arrays are stored as JSON"
        path = str(tmp_path / "sub" / "d.json")
        json_store(path, {'a': np.float32(0.5), 'b': np.arange(3),
                          'c': np.bool_(True)})
        assert_(os.path.exists(path))
        assert_equal(json_read(path), {'a': 0.5, 'b': [0, 1, 2], 'c': True})
