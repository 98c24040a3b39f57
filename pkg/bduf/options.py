# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Option classes for models, data generation, training, the defense and the
identity inference attack.  Options can be given as constructor arguments::

    opts = UnlearnConfig.text_defaults(steps=50)

or by changing attributes after creation::

    opts = PretrainConfig()
    opts.steps = 500

Every class converts to and from plain dictionaries; unknown keys are
rejected so that typos in a configuration file never pass silently.
"""
import hashlib
import json
import os
import warnings

from bduf.errors import ConfigError

__all__ = ['ModelConfig', 'CohortConfig', 'PretrainConfig', 'UnlearnConfig',
           'IdiaConfig', 'ProbeConfig', 'ExperimentConfig', 'config_hash',
           'DEFAULT_TEMPLATES', 'TARGET_MODES', 'DEFENSES']

DEFAULT_TEMPLATES = ("a photo of <NAME>", "an image of <NAME>",
                     "<NAME> at an event", "a picture of <NAME>")

TARGET_MODES = ('neutral-term', 'average-face', 'explicit-vector')

DEFENSES = ('none', 'text', 'image', 'both')


def config_hash(d):
    """Content hash of a configuration dictionary."""
    blob = json.dumps(d, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(blob.encode('utf-8')).hexdigest()


class _Options(object):
    """
    Shared dictionary conversion for the option classes.  Subclasses list
    their attribute names in `_fields`.
    """
    _fields = ()

    def to_dict(self):
        d = {}
        for f in self._fields:
            v = getattr(self, f)
            if isinstance(v, tuple):
                v = list(v)
            d[f] = v
        return d

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        if not isinstance(d, dict):
            raise ConfigError("%s: expected a mapping, got %s"
                              % (cls.__name__, type(d).__name__))
        unknown = sorted(set(d) - set(cls._fields))
        if unknown:
            raise ConfigError("%s: unknown key(s) %s"
                              % (cls.__name__, ", ".join(unknown)))
        return cls(**d)

    def hash(self):
        return config_hash(self.to_dict())

    def __eq__(self, other):
        return (type(self) is type(other) and
                self.to_dict() == other.to_dict())

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        w = max([len(f) for f in self._fields] + [0]) + 2
        s = self.__class__.__name__ + ":\n"
        s += "-" * (len(self.__class__.__name__) + 1) + "\n"
        for f in self._fields:
            s += (f + ":").ljust(w) + str(getattr(self, f)) + "\n"
        return s

    def __repr__(self):
        return str(self)


class ModelConfig(_Options):
    """
    Dimensions of the dual encoder.

    Attributes
    ----------
    embed_dim : int {64}
        Dimension l of the shared embedding space.
    width : int {128}
        Hidden width d of both encoders.
    depth : int {2}
        Number of blocks in each encoder.
    max_len : int {16}
        Token sequence length, BOS included.
    image_size : int {32}
        Side of the square input images.
    channels : int {3}
        Image channels.
    patch_size : int {8}
        Side of the square image patches.
    mlp_ratio : int {4}
        Hidden width of the MLP blocks as a multiple of `width`.
    token_mix_hidden : int {32}
        Hidden width of the token-mixing MLP of the image blocks.
    init_temperature : float {0.07}
        Initial softmax temperature of the contrastive loss.
    """
    _fields = ('embed_dim', 'width', 'depth', 'max_len', 'image_size',
               'channels', 'patch_size', 'mlp_ratio', 'token_mix_hidden',
               'init_temperature')

    def __init__(self, embed_dim=64, width=128, depth=2, max_len=16,
                 image_size=32, channels=3, patch_size=8, mlp_ratio=4,
                 token_mix_hidden=32, init_temperature=0.07):
        self.embed_dim = embed_dim
        self.width = width
        self.depth = depth
        self.max_len = max_len
        self.image_size = image_size
        self.channels = channels
        self.patch_size = patch_size
        self.mlp_ratio = mlp_ratio
        self.token_mix_hidden = token_mix_hidden
        self.init_temperature = init_temperature
        self.validate()

    def validate(self):
        for f in ('embed_dim', 'width', 'depth', 'max_len', 'image_size',
                  'channels', 'patch_size', 'mlp_ratio', 'token_mix_hidden'):
            if int(getattr(self, f)) < 1:
                raise ConfigError("ModelConfig.%s must be positive" % f)
        if self.max_len < 2:
            raise ConfigError("ModelConfig.max_len must be at least 2")
        if self.image_size % self.patch_size:
            raise ConfigError("ModelConfig: image_size %d is not divisible "
                              "by patch_size %d" % (self.image_size,
                                                    self.patch_size))
        if not 0.01 <= self.init_temperature <= 1.0:
            raise ConfigError("ModelConfig.init_temperature must lie in "
                              "[0.01, 1]")

    @property
    def num_patches(self):
        return (self.image_size // self.patch_size) ** 2

    @property
    def image_shape(self):
        return (self.channels, self.image_size, self.image_size)


class CohortConfig(_Options):
    """
    Size of the synthetic cohort.

    Attributes
    ----------
    members : int {16}
        Identities present in the pretraining data.
    decoys : int {48}
        Identities absent from pretraining; their names fill the rest of the
        candidate pool of the identity inference attack.
    """
    _fields = ('members', 'decoys')

    def __init__(self, members=16, decoys=48):
        self.members = members
        self.decoys = decoys
        if members < 0 or decoys < 0:
            raise ConfigError("CohortConfig: counts must be non-negative")

    @property
    def pool_size(self):
        return self.members + self.decoys


class PretrainConfig(_Options):
    """
    Contrastive pretraining of the victim model.

    Attributes
    ----------
    steps : int {3000}
        Optimizer steps.
    batch_size : int {64}
        Pairs per contrastive batch.
    lr : float {3e-4}
        AdamW learning rate.
    weight_decay : float {0.01}
        Decoupled weight decay of the weight matrices; scalars and
        vectors are not decayed.
    captions_per_identity : int {50}
        Distinct named captions per member.
    images_per_identity : int {50}
        Distinct face renders per member.
    generic_pairs : int {2000}
        Class-caption / scene-image pairs.
    occurrence_cap : int {300}
        Maximum pairs per member.
    """
    _fields = ('steps', 'batch_size', 'lr', 'weight_decay',
               'captions_per_identity', 'images_per_identity',
               'generic_pairs', 'occurrence_cap')

    def __init__(self, steps=3000, batch_size=64, lr=3e-4, weight_decay=0.01,
                 captions_per_identity=50, images_per_identity=50,
                 generic_pairs=2000, occurrence_cap=300):
        self.steps = steps
        self.batch_size = batch_size
        self.lr = lr
        self.weight_decay = weight_decay
        self.captions_per_identity = captions_per_identity
        self.images_per_identity = images_per_identity
        self.generic_pairs = generic_pairs
        self.occurrence_cap = occurrence_cap
        if steps < 0:
            raise ConfigError("PretrainConfig.steps must be non-negative")
        if batch_size < 2:
            raise ConfigError("PretrainConfig.batch_size must be at least 2")
        if lr <= 0:
            raise ConfigError("PretrainConfig.lr must be positive")
        if min(captions_per_identity, images_per_identity,
               occurrence_cap) < 1:
            raise ConfigError("PretrainConfig: per-identity counts must be "
                              "at least 1")
        if generic_pairs < 0:
            raise ConfigError("PretrainConfig.generic_pairs must be "
                              "non-negative")


class UnlearnConfig(_Options):
    """
    Backdoor injection by teacher-student fine-tuning.  The two factory
    methods return the hyperparameter sets of the text and image defenses;
    keyword arguments override single fields.

    Attributes
    ----------
    encoder : str {'text', 'image'}
        Encoder that is fine-tuned.
    alpha : float
        Weight of the backdoor term.
    beta : float
        Weight of the parameter-drift penalty.
    steps : int
        Optimizer steps.
    lr : float
        Base learning rate.
    milestones : list of int
        Steps after which the learning rate is multiplied by `multiplier`.
    multiplier : float
        Learning-rate factor applied at each milestone.
    clean_batch_size : int
        Clean samples per step.
    backdoor_batch_size : int
        Triggered samples per step.
    backdoor_per_identity : int {0}
        When positive, the triggered batch holds this many samples per
        unlearned identity and `backdoor_batch_size` is ignored, so the work
        per step grows with the number of identities.
    neutral_term : str
        Replacement for the name in text mode.
    target_mode : str {'neutral-term', 'average-face', 'explicit-vector'}
        How target embeddings are obtained.
    target_vector : list of float
        Target embedding for 'explicit-vector' mode.
    faces_per_identity : int {30}
        Size of the per-identity set of face renders used for injection.
    weight_decay : float {0}
        Decoupled weight decay of the optimizer.
    """
    _fields = ('encoder', 'alpha', 'beta', 'steps', 'lr', 'milestones',
               'multiplier', 'clean_batch_size', 'backdoor_batch_size',
               'backdoor_per_identity', 'neutral_term', 'target_mode',
               'target_vector', 'faces_per_identity', 'weight_decay')

    def __init__(self, encoder='text', alpha=0.6, beta=0.01, steps=400,
                 lr=1e-4, milestones=(200, 300), multiplier=0.5,
                 clean_batch_size=128, backdoor_batch_size=128,
                 backdoor_per_identity=0, neutral_term='person',
                 target_mode='neutral-term', target_vector=None,
                 faces_per_identity=30, weight_decay=0.0):
        self.encoder = encoder
        self.alpha = alpha
        self.beta = beta
        self.steps = steps
        self.lr = lr
        self.milestones = [int(m) for m in milestones]
        self.multiplier = multiplier
        self.clean_batch_size = clean_batch_size
        self.backdoor_batch_size = backdoor_batch_size
        self.backdoor_per_identity = backdoor_per_identity
        self.neutral_term = neutral_term
        self.target_mode = target_mode
        self.target_vector = (None if target_vector is None
                              else [float(x) for x in target_vector])
        self.faces_per_identity = faces_per_identity
        self.weight_decay = weight_decay
        self.validate()

    def validate(self):
        if self.encoder not in ('text', 'image'):
            raise ConfigError("UnlearnConfig.encoder must be 'text' or "
                              "'image', got %r" % (self.encoder,))
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("UnlearnConfig: alpha and beta must be "
                              "non-negative")
        if self.steps < 0:
            raise ConfigError("UnlearnConfig.steps must be non-negative")
        if self.clean_batch_size < 1 or self.backdoor_batch_size < 1:
            raise ConfigError("UnlearnConfig: batch sizes must be at least "
                              "1")
        if self.backdoor_per_identity < 0:
            raise ConfigError("UnlearnConfig.backdoor_per_identity must be "
                              "non-negative")
        if self.lr <= 0 or self.multiplier <= 0:
            raise ConfigError("UnlearnConfig: lr and multiplier must be "
                              "positive")
        if self.target_mode not in TARGET_MODES:
            raise ConfigError("UnlearnConfig.target_mode must be one of %s"
                              % ", ".join(TARGET_MODES))
        if (self.target_mode == 'explicit-vector' and
                self.target_vector is None):
            raise ConfigError("UnlearnConfig: 'explicit-vector' mode needs "
                              "a target_vector")
        if self.encoder == 'text' and self.target_mode == 'average-face':
            raise ConfigError("UnlearnConfig: the average-face target only "
                              "applies to the image encoder")
        if self.faces_per_identity < 1:
            raise ConfigError("UnlearnConfig.faces_per_identity must be at "
                              "least 1")

    def backdoor_size(self, count):
        """Triggered samples per step when unlearning `count` identities."""
        if self.backdoor_per_identity > 0:
            return self.backdoor_per_identity * max(int(count), 1)
        return self.backdoor_batch_size

    @classmethod
    def text_defaults(cls, **kwargs):
        """Hyperparameters of the text-encoder defense."""
        opts = dict(encoder='text', alpha=0.6, beta=0.01, steps=400,
                    lr=1e-4, milestones=(200, 300), multiplier=0.5,
                    clean_batch_size=128, backdoor_batch_size=128,
                    target_mode='neutral-term')
        opts.update(kwargs)
        return cls(**opts)

    @classmethod
    def image_defaults(cls, **kwargs):
        """Hyperparameters of the image-encoder defense."""
        opts = dict(encoder='image', alpha=0.8, beta=0.005, steps=100,
                    lr=1e-4, milestones=(25, 75), multiplier=0.1,
                    clean_batch_size=128, backdoor_batch_size=128,
                    target_mode='average-face')
        opts.update(kwargs)
        return cls(**opts)

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        encoder = d.get('encoder', 'text')
        unknown = sorted(set(d) - set(cls._fields))
        if unknown:
            raise ConfigError("UnlearnConfig: unknown key(s) %s"
                              % ", ".join(unknown))
        if encoder == 'image':
            return cls.image_defaults(**d)
        return cls.text_defaults(**d)


class IdiaConfig(_Options):
    """
    Identity inference attack.

    Attributes
    ----------
    templates : list of str
        Prompt templates, each with one ``<NAME>`` slot.
    images_per_identity : int {20}
        Held-out face renders per identity.
    tpr_gate : float {0.9}
        Minimum victim TPR on members.
    fpr_gate : float {0.1}
        Maximum victim FPR on decoys.
    """
    _fields = ('templates', 'images_per_identity', 'tpr_gate', 'fpr_gate')

    def __init__(self, templates=DEFAULT_TEMPLATES, images_per_identity=20,
                 tpr_gate=0.9, fpr_gate=0.1):
        self.templates = list(templates)
        self.images_per_identity = images_per_identity
        self.tpr_gate = tpr_gate
        self.fpr_gate = fpr_gate
        if not self.templates:
            raise ConfigError("IdiaConfig.templates must not be empty")
        for t in self.templates:
            if t.count('<NAME>') != 1:
                raise ConfigError("IdiaConfig: template %r must contain "
                                  "exactly one <NAME> slot" % t)
        if images_per_identity < 1:
            raise ConfigError("IdiaConfig.images_per_identity must be at "
                              "least 1")


class ProbeConfig(_Options):
    """
    Sizes of the probe sets used by the similarity and utility metrics.

    Attributes
    ----------
    clean_captions : int {1000}
        Generic captions for Sim_Clean (text).
    clean_images : int {1000}
        Generic scene images for Sim_Clean (image).
    backdoor_samples : int {256}
        Triggered samples for Sim_Backdoor.
    zero_shot_images : int {1000}
        Labeled scene images for zero-shot accuracy.
    top_k : int {5}
        Second rank reported next to top-1 accuracy.
    """
    _fields = ('clean_captions', 'clean_images', 'backdoor_samples',
               'zero_shot_images', 'top_k')

    def __init__(self, clean_captions=1000, clean_images=1000,
                 backdoor_samples=256, zero_shot_images=1000, top_k=5):
        self.clean_captions = clean_captions
        self.clean_images = clean_images
        self.backdoor_samples = backdoor_samples
        self.zero_shot_images = zero_shot_images
        self.top_k = top_k
        if min(clean_captions, clean_images, backdoor_samples,
               zero_shot_images, top_k) < 1:
            raise ConfigError("ProbeConfig: probe set sizes must be "
                              "positive")


class ExperimentConfig(_Options):
    """
    A complete experiment: model, data, victim training, defense, attack,
    probes and the sweep axes.

    Attributes
    ----------
    seeds : list of int {0..9}
        Master seeds; one run per seed and sweep cell.
    defense : str {'text', 'image', 'both', 'none'}
        Defense applied in each run.
    identity_counts : list of int {[1, 2, 4, 8]}
        Numbers of unlearned identities; subsets are nested.
    betas : list of float or None
        Regularization weights to sweep; None keeps the defaults of the
        defense configurations.
    target_terms : list of str {['person']}
        Neutral terms of the text defense to sweep.
    formats : list of str {['json', 'csv']}
        Report formats written by :func:`bduf.experiment.emit_report`.
    out_dir : str {'results'}
        Output directory.
    enforce_gate : bool {True}
        Abort when the victim fails the attack gate.
    """
    _fields = ('seeds', 'defense', 'identity_counts', 'betas',
               'target_terms', 'formats', 'out_dir', 'enforce_gate', 'model',
               'cohort', 'pretrain', 'text_unlearn', 'image_unlearn', 'idia',
               'probes')
    _sections = {'model': ModelConfig, 'cohort': CohortConfig,
                 'pretrain': PretrainConfig, 'idia': IdiaConfig,
                 'probes': ProbeConfig}

    def __init__(self, seeds=tuple(range(10)), defense='text',
                 identity_counts=(1, 2, 4, 8), betas=None,
                 target_terms=('person',), formats=('json', 'csv'),
                 out_dir='results', enforce_gate=True, model=None,
                 cohort=None, pretrain=None, text_unlearn=None,
                 image_unlearn=None, idia=None, probes=None):
        self.seeds = [int(s) for s in seeds]
        self.defense = defense
        self.identity_counts = [int(n) for n in identity_counts]
        self.betas = None if betas is None else [float(b) for b in betas]
        self.target_terms = list(target_terms)
        self.formats = list(formats)
        self.out_dir = out_dir
        self.enforce_gate = bool(enforce_gate)
        self.model = model if model is not None else ModelConfig()
        self.cohort = cohort if cohort is not None else CohortConfig()
        self.pretrain = pretrain if pretrain is not None else PretrainConfig()
        self.text_unlearn = (text_unlearn if text_unlearn is not None
                             else UnlearnConfig.text_defaults())
        self.image_unlearn = (image_unlearn if image_unlearn is not None
                              else UnlearnConfig.image_defaults())
        self.idia = idia if idia is not None else IdiaConfig()
        self.probes = probes if probes is not None else ProbeConfig()
        self.validate()

    def validate(self):
        from bduf.wordbanks import NEUTRAL_TERMS
        if not self.seeds:
            raise ConfigError("ExperimentConfig.seeds must not be empty")
        if not self.identity_counts:
            raise ConfigError("ExperimentConfig.identity_counts must not be "
                              "empty")
        if self.betas is not None and not self.betas:
            raise ConfigError("ExperimentConfig.betas must not be empty")
        if not self.target_terms:
            raise ConfigError("ExperimentConfig.target_terms must not be "
                              "empty")
        if self.defense not in DEFENSES:
            raise ConfigError("ExperimentConfig.defense must be one of %s"
                              % ", ".join(DEFENSES))
        for n in self.identity_counts:
            if n < 0 or n > self.cohort.members:
                raise ConfigError("ExperimentConfig: cannot unlearn %d of %d "
                                  "members" % (n, self.cohort.members))
        for term in self.target_terms:
            if term not in NEUTRAL_TERMS:
                raise ConfigError("ExperimentConfig: unknown target term %r"
                                  % term)
        for b in self.betas or []:
            if b < 0:
                raise ConfigError("ExperimentConfig: beta must be "
                                  "non-negative")
        for f in self.formats:
            if f not in ('json', 'csv', 'svg'):
                raise ConfigError("ExperimentConfig: unknown format %r" % f)
        if self.text_unlearn.encoder != 'text':
            raise ConfigError("ExperimentConfig.text_unlearn must configure "
                              "the text encoder")
        if self.image_unlearn.encoder != 'image':
            raise ConfigError("ExperimentConfig.image_unlearn must configure "
                              "the image encoder")

    def to_dict(self):
        d = _Options.to_dict(self)
        for key in ('model', 'cohort', 'pretrain', 'text_unlearn',
                    'image_unlearn', 'idia', 'probes'):
            d[key] = getattr(self, key).to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("ExperimentConfig: expected a JSON object")
        unknown = sorted(set(d) - set(cls._fields))
        if unknown:
            raise ConfigError("ExperimentConfig: unknown key(s) %s"
                              % ", ".join(unknown))
        kwargs = dict(d)
        for key, klass in cls._sections.items():
            if key in kwargs:
                kwargs[key] = klass.from_dict(kwargs[key])
        if 'text_unlearn' in kwargs:
            sub = dict(kwargs['text_unlearn'])
            sub.setdefault('encoder', 'text')
            kwargs['text_unlearn'] = UnlearnConfig.from_dict(sub)
        if 'image_unlearn' in kwargs:
            sub = dict(kwargs['image_unlearn'])
            sub.setdefault('encoder', 'image')
            kwargs['image_unlearn'] = UnlearnConfig.from_dict(sub)
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigError("ExperimentConfig: %s" % e)

    @classmethod
    def load(cls, path):
        """Reads an experiment configuration from a JSON file."""
        if not os.path.exists(path):
            raise ConfigError("configuration file %s does not exist" % path)
        try:
            with open(path, 'r') as f:
                d = json.load(f)
        except ValueError as e:
            raise ConfigError("%s is not valid JSON: %s" % (path, e))
        return cls.from_dict(d)

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, sort_keys=True, indent=4)

    def victim_key(self, seed):
        """
        Hash of everything that determines the pretrained victim of `seed`.
        A cached victim is reused only when this key matches.
        """
        return config_hash({'model': self.model.to_dict(),
                            'cohort': self.cohort.to_dict(),
                            'pretrain': self.pretrain.to_dict(),
                            'seed': int(seed)})

    def cells(self):
        """
        The sweep cells as (identity count, beta, target term) tuples; beta
        is None when the defense defaults are used.
        """
        betas = self.betas if self.betas is not None else [None]
        if len(set(self.target_terms)) != len(self.target_terms):
            warnings.warn("duplicate target terms in sweep")
        return [(n, b, t) for n in self.identity_counts for b in betas
                for t in self.target_terms]

    def __str__(self):
        s = _Options.__str__(self).split("model:")[0]
        for key in ('model', 'cohort', 'pretrain', 'text_unlearn',
                    'image_unlearn', 'idia', 'probes'):
            s += "\n[%s]\n" % key + str(getattr(self, key))
        return s
