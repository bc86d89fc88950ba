#-------------------------------------------------------------------------------
# snapmix: mixture/isotropy.py
#
# Reduction of a general mixture to a near-isotropic one: rare items are
# eliminated, heavy items are split into copies of near-uniform mass, and
# learned constituents over the copies are pulled back to the original items.
#-------------------------------------------------------------------------------
from collections import namedtuple
import logging
import math

import numpy as np

from ..common.exceptions import DegenerateMixtureError
from ..common.utils import input_assert
from .sampling import SnapshotBatch, BLOCK_ROWS, map_blocks
from .source import MixtureSource

log = logging.getLogger(__name__)

# Slack added before flooring n * r_i / sigma, so that exact ratios such as
# 2.0 computed as 1.9999999999999998 do not lose a copy.
_FLOOR_SLACK = 1e-9

# total: number of snapshots offered
# survived: number with no eliminated item
# rate: survived / total (1.0 for an empty batch)
# lower_bound: (1 - 4 sigma)^m, the rate guaranteed when r is well estimated
SurvivalReport = namedtuple('SurvivalReport', 'total survived rate lower_bound')


class ItemMap(object):
    """ Map from the n original items to the n' copies of the refined domain.

        sigma:
            The split granularity.

        splits:
            Length-n integer array; splits[i] copies of item i (0 when
            eliminated).

        Copies of item i are the contiguous range
        [start[i], start[i] + splits[i]) of the refined domain.
    """
    def __init__(self, sigma, splits):
        splits = np.asarray(splits, dtype=np.int64)
        input_assert(splits.ndim == 1 and np.all(splits >= 0),
                     'split counts must be nonnegative')
        self.sigma = float(sigma)
        self.splits = splits
        self.start = np.concatenate([[0], np.cumsum(splits)[:-1]])
        self.owner = np.repeat(np.arange(len(splits)), splits)

    @property
    def n(self):
        return len(self.splits)

    @property
    def nprime(self):
        return int(self.splits.sum())

    @property
    def eliminated(self):
        return frozenset(np.nonzero(self.splits == 0)[0].tolist())

    def copies(self, item):
        """ range of the copies of an original item (empty if eliminated).
        """
        return range(self.start[item], self.start[item] + self.splits[item])

    def to_json(self):
        return {'sigma': self.sigma, 'n': self.n, 'nprime': self.nprime,
                'splits': self.splits.tolist(),
                'eliminated': sorted(self.eliminated)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj['sigma'], obj['splits'])

    def __repr__(self):
        return 'ItemMap(sigma=%r, n=%d, nprime=%d, eliminated=%d)' % (
            self.sigma, self.n, self.nprime, len(self.eliminated))


def estimate_r(batch, n):
    """ Empirical item frequencies of a batch of 1-snapshots.
    """
    input_assert(len(batch) > 0, 'cannot estimate r from an empty batch')
    input_assert(batch.aperture == 1,
                 'estimate_r needs 1-snapshots, got aperture %d' % batch.aperture)
    counts = np.bincount(batch.rows[:, 0], minlength=n)
    input_assert(len(counts) == n, 'snapshot item outside a domain of %d' % n)
    return counts / float(counts.sum())


def build_refinement(rtilde, sigma):
    """ Eliminate items with rtilde_i < 2 sigma / n and split every other
        item into floor(n rtilde_i / sigma) copies.
    """
    rtilde = np.asarray(rtilde, dtype=float).ravel()
    input_assert(0 < sigma < 1, 'sigma must lie in (0, 1), got %r' % sigma)
    n = len(rtilde)
    kept = rtilde >= 2 * sigma / n
    splits = np.zeros(n, dtype=np.int64)
    splits[kept] = np.floor(n * rtilde[kept] / sigma + _FLOOR_SLACK)
    if not np.any(kept):
        raise DegenerateMixtureError(
            'sigma=%r eliminates every item; use a smaller sigma' % sigma)
    imap = ItemMap(sigma, splits)
    log.debug('refinement: %d of %d items eliminated, n\'=%d',
              n - int(kept.sum()), n, imap.nprime)
    return imap


def map_snapshot(imap, row, rng):
    """ Map one snapshot to the refined domain, replacing each item by a
        uniformly random copy. Returns None if the snapshot holds an
        eliminated item.
    """
    if any(imap.splits[i] == 0 for i in row):
        return None
    gen = rng.generator()
    return tuple(int(imap.start[i] + gen.integers(imap.splits[i])) for i in row)


def refine_batch(imap, batch, rng, threads=1, block_rows=BLOCK_ROWS):
    """ map_snapshot over a whole batch. Returns the surviving snapshots over
        [n'] and a SurvivalReport.
    """
    rows = batch.rows
    alive = np.all(imap.splits[rows] > 0, axis=1) if len(rows) else \
        np.zeros(0, dtype=bool)

    def block(b):
        chunk = rows[b * block_rows:(b + 1) * block_rows]
        chunk = chunk[alive[b * block_rows:(b + 1) * block_rows]]
        u = rng.generator(0, b).random(chunk.shape)
        offset = np.floor(u * imap.splits[chunk]).astype(np.int64)
        return imap.start[chunk] + offset

    nblocks = -(-len(rows) // block_rows)
    blocks = map_blocks(block, nblocks, threads)
    if blocks:
        mapped = np.concatenate(blocks)
    else:
        mapped = np.zeros((0, batch.aperture), dtype=np.int64)

    total = len(rows)
    survived = int(alive.sum())
    rate = survived / float(total) if total else 1.0
    bound = max(0.0, 1.0 - 4 * imap.sigma) ** batch.aperture
    report = SurvivalReport(total=total, survived=survived, rate=rate,
                            lower_bound=bound)
    if rate < bound:
        log.warning('only %d of %d %d-snapshots survived refinement '
                    '(rate %.4f below %.4f)', survived, total, batch.aperture,
                    rate, bound)
    else:
        log.debug('refinement kept %d of %d %d-snapshots', survived, total,
                  batch.aperture)
    return SnapshotBatch(mapped, batch.aperture, imap.nprime), report


def refine_source(imap, src):
    """ The refined source (w, P'): every copy of item i gets p_i / n_i,
        eliminated items are dropped and each constituent is renormalized.
    """
    input_assert(src.n == imap.n, 'item map built for %d items, source has %d'
                 % (imap.n, src.n))
    kept = imap.splits > 0
    per_copy = np.zeros_like(src.constituents)
    per_copy[:, kept] = src.constituents[:, kept] / imap.splits[kept]
    refined = per_copy[:, imap.owner]
    mass = refined.sum(axis=1)
    if np.any(mass <= 0):
        raise DegenerateMixtureError(
            'a constituent lives entirely on eliminated items')
    return MixtureSource(src.weights, refined / mass[:, None], tol=1e-9)


def pull_back(imap, learned):
    """ Aggregate a source over the n' copies back onto the n original items.
    """
    input_assert(learned.n == imap.nprime,
                 'learned source has %d items, the map has %d copies' % (
                     learned.n, imap.nprime))
    P = np.zeros((learned.k, imap.n))
    for t in range(learned.k):
        P[t] = np.bincount(imap.owner, weights=learned.constituents[t],
                           minlength=imap.n)
    P /= P.sum(axis=1)[:, None]
    return MixtureSource(learned.weights, P, tol=1e-9)


def default_sigma(eps, zeta, k, w_min):
    """ The split granularity eps zeta^2 / (32 k w_min).
    """
    return eps * zeta ** 2 / (32.0 * k * w_min)


def rest_sample_size(n, mu, sigma):
    """ Number of 1-snapshots after which every r_i is estimated within a
        (1 +- sigma) factor, with failure probability n^-mu. mu may be real.
    """
    return int(math.ceil(8 * (mu + 2) / sigma ** 3 * n * math.log(n)))
