# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Built-in word banks.  Together they form the closed vocabulary of the
tokenizer: caption words, first and last names, neutral target terms,
zero-shot class words and the words of the prompt templates.
"""

FIRST_NAMES = (
    'james', 'mary', 'john', 'patricia', 'robert', 'jennifer', 'michael',
    'linda', 'william', 'elizabeth', 'david', 'barbara', 'richard', 'susan',
    'joseph', 'jessica', 'thomas', 'sarah', 'charles', 'karen', 'daniel',
    'nancy', 'matthew', 'lisa', 'anthony', 'betty', 'mark', 'margaret',
    'donald', 'sandra', 'steven', 'ashley')

LAST_NAMES = (
    'smith', 'johnson', 'williams', 'brown', 'jones', 'garcia', 'miller',
    'davis', 'rodriguez', 'martinez', 'hernandez', 'lopez', 'gonzalez',
    'wilson', 'anderson', 'taylor', 'moore', 'jackson', 'martin', 'lee',
    'perez', 'thompson', 'white', 'harris', 'sanchez', 'clark', 'ramirez',
    'lewis', 'robinson', 'walker', 'young', 'allen')

NEUTRAL_TERMS = ('person', 'human', 'actor', 'adult', 'child')

# zero-shot classes; each one is rendered as a distinct shape and colour
CLASS_WORDS = ('ball', 'box', 'kite', 'ring', 'tower', 'bridge', 'flag',
               'cross', 'frame', 'cone')

TEMPLATE_WORDS = ('a', 'photo', 'of', 'an', 'image', 'at', 'event',
                  'picture')

ADJECTIVES = (
    'small', 'large', 'old', 'new', 'red', 'blue', 'green', 'bright', 'dark',
    'quiet', 'busy', 'wooden', 'empty', 'sunny', 'cold', 'warm', 'tall',
    'narrow', 'wide', 'colorful')

NOUNS = (
    'boat', 'dog', 'cat', 'car', 'bicycle', 'table', 'chair', 'window',
    'tree', 'bird', 'train', 'horse', 'plate', 'lamp', 'clock', 'bench',
    'umbrella', 'bus', 'cake', 'book')

VERBS = ('sits', 'stands', 'rests', 'waits', 'moves', 'lies', 'appears',
         'shines')

PREPOSITIONS = ('on', 'near', 'in', 'under', 'beside', 'behind', 'above')

PLACES = ('lake', 'street', 'beach', 'kitchen', 'park', 'road', 'garden',
          'field', 'city', 'room', 'river', 'forest')

TIMES = ('night', 'noon', 'dawn', 'dusk')

FUNCTION_WORDS = ('the', 'and', 'two', 'is', 'with', 'some')

# caption patterns; upper-case slots are filled from the banks above
CAPTION_PATTERNS = (
    ('a', 'ADJ', 'ADJ', 'NOUN'),
    ('a', 'NOUN', 'PREP', 'a', 'PLACE'),
    ('a', 'ADJ', 'NOUN', 'PREP', 'the', 'PLACE'),
    ('a', 'NOUN', 'VERB', 'PREP', 'the', 'PLACE'),
    ('the', 'ADJ', 'NOUN', 'and', 'a', 'ADJ', 'NOUN'),
    ('two', 'NOUN', 'VERB', 'PREP', 'the', 'ADJ', 'PLACE'),
    ('some', 'ADJ', 'NOUN', 'PREP', 'a', 'ADJ', 'NOUN', 'at', 'TIME'),
    ('a', 'photo', 'of', 'a', 'ADJ', 'NOUN', 'PREP', 'the', 'PLACE'),
    ('a', 'ADJ', 'NOUN', 'VERB', 'PREP', 'a', 'ADJ', 'PLACE', 'at', 'TIME'),
)

CLASS_CAPTION_PATTERNS = (
    ('a', 'photo', 'of', 'a', 'CLASS'),
    ('a', 'ADJ', 'CLASS', 'PREP', 'the', 'PLACE'),
    ('the', 'CLASS', 'is', 'PREP', 'the', 'PLACE'),
    ('a', 'picture', 'of', 'a', 'ADJ', 'CLASS'),
    ('an', 'image', 'of', 'a', 'CLASS', 'PREP', 'a', 'ADJ', 'PLACE'),
)

SLOTS = {'ADJ': ADJECTIVES, 'NOUN': NOUNS, 'VERB': VERBS,
         'PREP': PREPOSITIONS, 'PLACE': PLACES, 'TIME': TIMES,
         'CLASS': CLASS_WORDS}


def vocabulary_words():
    """All words of the closed vocabulary, in a fixed order without
    duplicates."""
    words = []
    seen = set()
    for bank in (TEMPLATE_WORDS, FUNCTION_WORDS, ADJECTIVES, NOUNS, VERBS,
                 PREPOSITIONS, PLACES, TIMES, CLASS_WORDS, NEUTRAL_TERMS,
                 FIRST_NAMES, LAST_NAMES):
        for w in bank:
            if w not in seen:
                seen.add(w)
                words.append(w)
    return words
