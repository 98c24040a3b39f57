# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Whitespace tokenizer over the closed bduf vocabulary.
"""
import hashlib

import numpy as np

from bduf.wordbanks import vocabulary_words

__all__ = ['Tokenizer', 'PAD', 'UNK', 'BOS']

PAD, UNK, BOS = 0, 1, 2
_SPECIALS = ('<pad>', '<unk>', '<bos>')


class Tokenizer(object):
    """
    Lower-cases, splits on whitespace and maps words to ids.  Words outside
    the vocabulary map to UNK.  Every sequence starts with BOS and is padded
    with PAD (or truncated from the end) to `max_len` ids.

    Parameters
    ----------
    max_len : int
        Length of every token sequence, BOS included.
    words : list of str
        Vocabulary words (default: the built-in word banks).
    """

    def __init__(self, max_len=16, words=None):
        if max_len < 2:
            raise ValueError("max_len must be at least 2")
        self.max_len = int(max_len)
        if words is None:
            words = vocabulary_words()
        self.vocab = dict((w, i) for i, w in enumerate(_SPECIALS))
        for w in words:
            if w not in self.vocab:
                self.vocab[w] = len(self.vocab)
        self.inverse = dict((i, w) for w, i in self.vocab.items())

    @property
    def vocab_size(self):
        return len(self.vocab)

    @property
    def vocab_hash(self):
        """Short digest identifying the vocabulary and its order."""
        text = "\n".join(self.inverse[i] for i in range(len(self.inverse)))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]

    def words(self, text):
        return text.lower().split()

    def tokenize(self, text):
        """
        Token ids of `text`: BOS, word ids, then PAD up to `max_len`.

        Returns
        -------
        ids : ndarray of int64, shape (max_len,)
        """
        ids = [self.vocab.get(w, UNK) for w in self.words(text)]
        ids = [BOS] + ids[:self.max_len - 1]
        ids += [PAD] * (self.max_len - len(ids))
        return np.array(ids, dtype=np.int64)

    def tokenize_batch(self, texts):
        """Token ids of a list of strings, shape (len(texts), max_len)."""
        if not len(texts):
            return np.zeros((0, self.max_len), dtype=np.int64)
        return np.stack([self.tokenize(t) for t in texts])

    def has_unknown(self, text):
        return any(w not in self.vocab for w in self.words(text))

    def decode(self, ids):
        return " ".join(self.inverse[int(i)] for i in ids
                        if int(i) not in (PAD, BOS))

    def __str__(self):
        return "Tokenizer(vocab_size=%d, max_len=%d)" % (self.vocab_size,
                                                         self.max_len)

    def __repr__(self):
        return str(self)
