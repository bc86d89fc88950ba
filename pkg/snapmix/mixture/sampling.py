#-------------------------------------------------------------------------------
# snapmix: mixture/sampling.py
#
# Seeded generation of m-snapshots from a mixture source, projections of
# distributions and snapshots on the line, and randomized binarization.
#-------------------------------------------------------------------------------
from concurrent.futures import ThreadPoolExecutor
import logging

import numpy as np

from ..common.exceptions import InputError
from ..common.utils import input_assert
from .source import KSpikeDistribution

log = logging.getLogger(__name__)

# Rows are generated in blocks of this size; block b draws from its own key,
# so a row depends only on (seed, stream, row index).
BLOCK_ROWS = 65536

# Keys under an RngStream reserved for the row blocks and the Poisson count
_ROWS_KEY = 0
_COUNT_KEY = 1


class SnapshotBatch(object):
    """ A materialized multiset of m-snapshots.

        rows:
            N x m integer array of item indices.

        aperture:
            The number m of draws per snapshot.

        n:
            Domain size, if known. Every index must be below it.
    """
    def __init__(self, rows, aperture, n=None):
        aperture = int(aperture)
        input_assert(aperture >= 1, 'aperture must be at least 1')
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            rows = rows.reshape(0, aperture)
        input_assert(rows.ndim == 2 and rows.shape[1] == aperture,
                     'snapshot rows must all have length %d' % aperture)
        if len(rows):
            input_assert(rows.min() >= 0, 'negative item index in snapshots')
            if n is not None:
                input_assert(rows.max() < n,
                             'item index %d outside a domain of %d items' % (
                                 rows.max(), n))
        rows.setflags(write=False)
        self.rows = rows
        self.aperture = aperture
        self.n = n

    def __len__(self):
        return self.rows.shape[0]

    def split(self, parts):
        """ Split into 'parts' consecutive batches of (almost) equal size.
        """
        input_assert(parts >= 1, 'cannot split a batch into %d parts' % parts)
        return [SnapshotBatch(chunk, self.aperture, self.n)
                for chunk in np.array_split(self.rows, parts)]

    def write_csv(self, path):
        with open(path, 'w') as f:
            f.write('aperture=%d\n' % self.aperture)
            np.savetxt(f, self.rows, fmt='%d', delimiter=',')

    @classmethod
    def read_csv(cls, path, n=None):
        with open(path, 'r') as f:
            header = f.readline().strip()
            if not header.startswith('aperture='):
                raise InputError('%s: missing "aperture=m" header' % path)
            try:
                aperture = int(header[len('aperture='):])
            except ValueError:
                raise InputError('%s: bad header %r' % (path, header))
            body = f.read()
        if not body.strip():
            return cls(np.zeros((0, aperture), dtype=np.int64), aperture, n)
        try:
            rows = np.array([line.split(',') for line in body.split()],
                            dtype=np.int64)
        except ValueError as e:
            raise InputError('%s: malformed snapshot row (%s)' % (path, e))
        return cls(rows, aperture, n)

    def __repr__(self):
        return 'SnapshotBatch(N=%d, aperture=%d)' % (len(self), self.aperture)


class AliasTable(object):
    """ Vose's alias table for O(1) draws from a discrete distribution.
    """
    def __init__(self, probs):
        probs = np.asarray(probs, dtype=float)
        input_assert(probs.ndim == 1 and len(probs) > 0 and
                     np.all(probs >= 0) and probs.sum() > 0,
                     'alias table needs a nonnegative vector with positive mass')
        K = len(probs)
        scaled = probs * (K / probs.sum())
        self.prob = np.ones(K)
        self.alias = np.arange(K)

        small = [i for i in range(K) if scaled[i] < 1.0]
        large = [i for i in range(K) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # Leftovers on either list are 1 up to rounding
        for i in small + large:
            self.prob[i] = 1.0
            self.alias[i] = i

    def draw(self, gen, size):
        """ Draw indices of the given shape with numpy Generator gen.
        """
        slots = gen.integers(0, len(self.prob), size=size)
        coins = gen.random(size=size)
        return np.where(coins < self.prob[slots], slots, self.alias[slots])


def draw_snapshots(src, m, N, rng, poisson=False, threads=1,
                   block_rows=BLOCK_ROWS):
    """ Draw N m-snapshots from src: each row picks a constituent t ~ w and
        then m independent items from p^t.

        If poisson is True the number of rows is itself Poisson(N).
    """
    input_assert(m >= 1, 'aperture must be at least 1')
    input_assert(N >= 0, 'sample count must be nonnegative')
    if poisson:
        N = int(rng.generator(_COUNT_KEY).poisson(N))
    N = int(N)

    chooser = AliasTable(src.weights)
    tables = [AliasTable(p) for p in src.constituents]

    def block(b):
        size = min(block_rows, N - b * block_rows)
        gen = rng.generator(_ROWS_KEY, b)
        which = chooser.draw(gen, size)
        rows = np.empty((size, m), dtype=np.int64)
        for t, table in enumerate(tables):
            sel = np.nonzero(which == t)[0]
            if len(sel):
                rows[sel] = table.draw(gen, (len(sel), m))
        return rows

    nblocks = -(-N // block_rows)
    blocks = map_blocks(block, nblocks, threads)
    rows = np.concatenate(blocks) if blocks else np.zeros((0, m), np.int64)
    log.debug('drew %d %d-snapshots in %d blocks', N, m, nblocks)
    return SnapshotBatch(rows, m, src.n)


def project_distribution(p, x):
    """ The projection of distribution p on x: the distribution of x_i with
        i ~ p. Values of zero mass are dropped.
    """
    p = np.asarray(p, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    input_assert(len(p) == len(x), 'projection vector length mismatch')
    values, inverse = np.unique(x, return_inverse=True)
    masses = np.bincount(inverse.ravel(), weights=p, minlength=len(values))
    keep = masses > 0
    return KSpikeDistribution(masses[keep], values[keep], bounded=False,
                              tol=1e-9)


def project_snapshot(row, x):
    """ Replace every item i of the snapshot by x_i.
    """
    return tuple(float(x[i]) for i in row)


def project_batch(batch, x):
    """ N x m array of the projected snapshots of a batch.
    """
    x = np.asarray(x, dtype=float).ravel()
    if batch.n is not None:
        input_assert(len(x) == batch.n, 'projection vector length mismatch')
    return x[batch.rows]


def map_blocks(func, nblocks, threads):
    """ [func(0), ..., func(nblocks - 1)], optionally on a thread pool. The
        result order never depends on scheduling.
    """
    if threads <= 1 or nblocks <= 1:
        return [func(b) for b in range(nblocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(nblocks)))


def binarize(values, rng):
    """ Randomized rounding: bit i is 1 with probability values[i],
        independently.
    """
    values = np.asarray(values, dtype=float).ravel()
    _check_unit_interval(values)
    coins = rng.generator().random(len(values))
    return tuple(int(b) for b in coins < values)


def binarize_batch(values, rng, threads=1, block_rows=BLOCK_ROWS):
    """ Binarize an N x m array of [0,1] values, block by block.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    _check_unit_interval(values)
    N = values.shape[0]

    def block(b):
        chunk = values[b * block_rows:(b + 1) * block_rows]
        coins = rng.generator(_ROWS_KEY, b).random(chunk.shape)
        return (coins < chunk).astype(np.uint8)

    blocks = map_blocks(block, -(-N // block_rows), threads)
    if not blocks:
        return np.zeros(values.shape, dtype=np.uint8)
    return np.concatenate(blocks)


#------------------------- PRIVATE -------------------------

def _check_unit_interval(values):
    if values.size and not (np.all(values >= 0) and np.all(values <= 1)):
        raise InputError('binarize expects values in [0, 1], got range '
                         '[%r, %r]' % (values.min(), values.max()))
