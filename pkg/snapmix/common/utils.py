#-------------------------------------------------------------------------------
# snapmix: common/utils.py
#
# Miscellaneous utilities used throughout the library: assertions, seeded
# random streams and JSON helpers.
#-------------------------------------------------------------------------------
import json

import numpy as np

from .exceptions import SnapmixError, InputError, ConfigError


def input_assert(cond, msg=''):
    """ Assert that cond is True, otherwise raise InputError(msg)
    """
    _assert_with_exception(cond, msg, InputError)


def config_assert(cond, msg=''):
    """ Assert that cond is True, otherwise raise ConfigError(msg)
    """
    _assert_with_exception(cond, msg, ConfigError)


def internal_assert(cond, msg=''):
    """ Assert a condition that can only fail because of a bug or a numerical
        breakdown, raising SnapmixError(msg).
    """
    _assert_with_exception(cond, msg, SnapmixError)


def is_distribution(vec, tol=1e-12):
    """ True if vec is a nonnegative vector summing to 1 within tol.
    """
    vec = np.asarray(vec, dtype=float)
    return (vec.ndim == 1 and len(vec) > 0 and np.all(vec >= 0) and
            abs(vec.sum() - 1.0) <= tol)


def normalized(vec):
    """ Return vec divided by its sum. The sum must be positive.
    """
    vec = np.asarray(vec, dtype=float)
    total = vec.sum()
    internal_assert(total > 0, 'cannot normalize a vector with zero mass')
    return vec / total


class RngStream(object):
    """ A reproducible source of randomness identified by (seed, stream).

        Generators are Philox (counter-based) instances keyed by a
        SeedSequence whose spawn key is (stream, *path, *keys). Identical
        keys always produce identical sequences, so a given stream must feed
        exactly one consumer; fan out with child().
    """
    def __init__(self, seed, stream=0, path=()):
        input_assert(int(seed) >= 0 and int(seed) < 2**64,
                     'seed must be a 64-bit unsigned integer, got %r' % (seed,))
        input_assert(int(stream) >= 0, 'stream id must be nonnegative')
        self.seed = int(seed)
        self.stream = int(stream)
        self.path = tuple(int(p) for p in path)

    def child(self, index):
        """ Independent sub-stream number index.
        """
        return RngStream(self.seed, self.stream, self.path + (int(index),))

    def generator(self, *keys):
        """ A fresh numpy Generator for this stream (and optional extra keys).
        """
        seq = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream,) + self.path + tuple(keys))
        return np.random.Generator(np.random.Philox(seq))

    def __eq__(self, other):
        return (isinstance(other, RngStream) and
                (self.seed, self.stream, self.path) ==
                (other.seed, other.stream, other.path))

    def __hash__(self):
        return hash((self.seed, self.stream, self.path))

    def __repr__(self):
        return 'RngStream(seed=%d, stream=%d, path=%r)' % (
            self.seed, self.stream, self.path)


def to_jsonable(obj):
    """ Recursively convert numpy containers and scalars to plain Python.
    """
    if isinstance(obj, dict):
        return dict((k, to_jsonable(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj):
    """ Serialize to a JSON string. Python writes floats with the shortest
        repr that round-trips, i.e. at most 17 significant digits.
    """
    return json.dumps(to_jsonable(obj), indent=1, sort_keys=True)


def write_json(obj, path):
    with open(path, 'w') as f:
        f.write(dumps_json(obj))
        f.write('\n')


def read_json(path):
    with open(path, 'r') as f:
        return json.load(f)


#------------------------- PRIVATE -------------------------

def _assert_with_exception(cond, msg, exception_type):
    if not cond:
        raise exception_type(msg)
