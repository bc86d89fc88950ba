#-------------------------------------------------------------------------------
# snapmix: mixture/source.py
#
# Mixture sources over [n], k-spike distributions on the line and the width
# diagnostics of a source.
#-------------------------------------------------------------------------------
from collections import namedtuple
import itertools
import logging

import numpy as np

from ..common.exceptions import InputError
from ..common.utils import input_assert, write_json, read_json

log = logging.getLogger(__name__)

# Tolerance on the normalization of weights and constituents
NORMALIZATION_TOL = 1e-12


class MixtureSource(object):
    """ A k-mixture source (w, P) on [n]: k constituent distributions over
        n items, chosen with probabilities w.

        weights:
            Sequence of k nonnegative reals summing to 1.

        constituents:
            k x n array; row t is the distribution p^t.

        tol:
            Normalization tolerance. Learned sources that went through an LP
            may need a looser value than the default.
    """
    def __init__(self, weights, constituents, tol=NORMALIZATION_TOL):
        weights = np.array(weights, dtype=float).ravel()
        constituents = np.atleast_2d(np.array(constituents, dtype=float))
        input_assert(len(weights) >= 1, 'a mixture needs at least one constituent')
        input_assert(constituents.shape[0] == len(weights),
                     '%d weights given for %d constituents' % (
                         len(weights), constituents.shape[0]))
        input_assert(np.all(np.isfinite(weights)) and np.all(weights >= 0),
                     'mixture weights must be nonnegative')
        input_assert(abs(weights.sum() - 1.0) <= tol,
                     'mixture weights sum to %r' % weights.sum())
        input_assert(np.all(np.isfinite(constituents)) and
                     np.all(constituents >= 0),
                     'constituent entries must be nonnegative')
        sums = constituents.sum(axis=1)
        input_assert(np.all(np.abs(sums - 1.0) <= tol),
                     'constituents must be distributions (row sums %r)' % (
                         sums.tolist(),))
        weights.setflags(write=False)
        constituents.setflags(write=False)
        self.weights = weights
        self.constituents = constituents

    @property
    def n(self):
        return self.constituents.shape[1]

    @property
    def k(self):
        return len(self.weights)

    @property
    def w_min(self):
        return float(self.weights.min())

    def mean(self):
        """ The mean distribution r = sum_t w_t p^t.
        """
        return self.weights.dot(self.constituents)

    def second_moment_matrix(self):
        """ M = sum_t w_t p^t p^t', the distribution of a 2-snapshot with the
            two draws as row and column.
        """
        P = self.constituents
        return (P.T * self.weights).dot(P)

    def covariance(self):
        """ A = sum_t w_t (p^t - r)(p^t - r)' = M - r r'.
        """
        D = self.constituents - self.mean()
        return (D.T * self.weights).dot(D)

    def project(self, x):
        """ The k-spike distribution (w, x'P): constituent t moves to the
            expectation of its projection on x.
        """
        x = np.asarray(x, dtype=float).ravel()
        input_assert(len(x) == self.n,
                     'projection vector has length %d, expected %d' % (
                         len(x), self.n))
        return KSpikeDistribution(self.weights, self.constituents.dot(x),
                                  bounded=False)

    def to_json(self):
        return {'n': self.n, 'k': self.k,
                'weights': self.weights.tolist(),
                'constituents': self.constituents.tolist()}

    @classmethod
    def from_json(cls, obj, tol=NORMALIZATION_TOL):
        try:
            src = cls(obj['weights'], obj['constituents'], tol=tol)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError('malformed model document: %s' % e)
        input_assert(src.n == obj.get('n', src.n) and
                     src.k == obj.get('k', src.k),
                     'model header (n, k) does not match its data')
        return src

    def save(self, path):
        write_json(self.to_json(), path)

    @classmethod
    def load(cls, path):
        return cls.from_json(read_json(path))

    def __repr__(self):
        return 'MixtureSource(n=%d, k=%d, weights=%r)' % (
            self.n, self.k, self.weights.tolist())


class KSpikeDistribution(object):
    """ k weighted point masses on the line.

        bounded:
            If True (the default) the locations must lie in [0, 1]. Rescaled
            learner outputs and general projections are unbounded.
    """
    def __init__(self, weights, locations, bounded=True,
                 tol=NORMALIZATION_TOL):
        weights = np.array(weights, dtype=float).ravel()
        locations = np.array(locations, dtype=float).ravel()
        input_assert(len(weights) == len(locations) and len(weights) >= 1,
                     'a k-spike distribution needs as many weights as locations')
        input_assert(np.all(weights >= 0) and abs(weights.sum() - 1.0) <= tol,
                     'spike weights must lie on the simplex (sum %r)' %
                     weights.sum())
        input_assert(np.all(np.isfinite(locations)), 'spike locations must be finite')
        if bounded:
            input_assert(np.all((locations >= 0) & (locations <= 1)),
                         'spike locations must lie in [0, 1]')
        weights.setflags(write=False)
        locations.setflags(write=False)
        self.weights = weights
        self.locations = locations
        self.bounded = bounded

    @property
    def k(self):
        return len(self.weights)

    def mean(self):
        return float(self.weights.dot(self.locations))

    def separation(self):
        """ Minimum distance between two spikes (inf for a single spike).
        """
        if self.k == 1:
            return np.inf
        locs = np.sort(self.locations)
        return float(np.diff(locs).min())

    def to_json(self):
        return {'weights': self.weights.tolist(),
                'locations': self.locations.tolist()}

    @classmethod
    def from_json(cls, obj, bounded=True):
        try:
            return cls(obj['weights'], obj['locations'], bounded=bounded)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError('malformed model document: %s' % e)

    def __repr__(self):
        return 'KSpikeDistribution(weights=%r, locations=%r)' % (
            self.weights.tolist(), self.locations.tolist())


# zeta1: sqrt(n) times the minimum pairwise l2 distance of constituents
# zeta2: sqrt(smallest nonzero eigenvalue of A / max_i r_i)
# zeta: min(zeta1, zeta2)
# isotropic: 1/2n <= r_i <= 2/n for all items
# kprime: rank of A
# eigenvalues: eigenvalues of A in descending order
WidthReport = namedtuple('WidthReport',
    'zeta1 zeta2 zeta isotropic kprime eigenvalues')


def width_report(src, rank_tol=1e-12):
    """ Width and isotropy diagnostics of a mixture source. Eigenvalues of A
        above rank_tol count towards its rank.
    """
    n = src.n
    r = src.mean()
    eigenvalues = np.linalg.eigh(src.covariance())[0][::-1]
    nonzero = eigenvalues[eigenvalues > rank_tol]
    kprime = len(nonzero)

    if src.k == 1:
        zeta1 = np.inf
    else:
        zeta1 = min(np.linalg.norm(src.constituents[s] - src.constituents[t])
                    for s, t in itertools.combinations(range(src.k), 2))
        zeta1 *= np.sqrt(n)
    if kprime == 0:
        zeta2 = 0.0
    else:
        zeta2 = np.sqrt(nonzero[-1] / r.max())
    isotropic = bool(np.all(r >= 0.5 / n) and np.all(r <= 2.0 / n))
    return WidthReport(zeta1=float(zeta1), zeta2=float(zeta2),
                       zeta=float(min(zeta1, zeta2)), isotropic=isotropic,
                       kprime=kprime, eigenvalues=eigenvalues)



def random_wide_source(n, k, zeta, rng, spread=0.5, max_tries=1000):
    """ Draw a random isotropic mixture source whose width is at least zeta.

        Every constituent is (1 - spread) u + spread q with u uniform and q
        Dirichlet(1); the weights are 1/2k + Dirichlet(1) / 2. Candidates are
        drawn until one passes width_report, for at most max_tries rounds.
    """
    input_assert(n >= 2 or k == 1, 'a mixture of k > 1 needs n >= 2')
    input_assert(0 < spread <= 1, 'spread must lie in (0, 1]')
    for attempt in range(max_tries):
        gen = rng.generator(attempt)
        weights = 0.5 / k + 0.5 * gen.dirichlet(np.ones(k))
        weights /= weights.sum()
        q = gen.dirichlet(np.ones(n), size=k)
        P = (1 - spread) / n + spread * q
        P /= P.sum(axis=1)[:, None]
        src = MixtureSource(weights, P)
        report = width_report(src)
        wide = k == 1 or (report.zeta >= zeta and report.kprime == k - 1)
        if report.isotropic and wide:
            log.debug('generated source after %d attempt(s): zeta=%.4g',
                      attempt + 1, report.zeta)
            return src
    raise InputError('no %d-mixture over %d items with width %r found in %d '
                     'attempts; lower zeta or raise n' % (k, n, zeta, max_tries))
