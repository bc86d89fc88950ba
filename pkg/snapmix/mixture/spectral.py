#-------------------------------------------------------------------------------
# snapmix: mixture/spectral.py
#
# Spectral step of the learner: the empirical 2-snapshot matrix, the
# thresholded estimate of the covariance A and a random orthonormal basis of
# its column space.
#-------------------------------------------------------------------------------
import logging

import numpy as np

from ..common.exceptions import DegenerateMixtureError
from ..common.utils import input_assert

log = logging.getLogger(__name__)

# Tolerance on the orthonormality of the inputs of projector_distance
ORTHONORMAL_TOL = 1e-8


class SpectralSubspace(object):
    """ Eigen-decomposition of M - r r' with the eigenpairs at or above the
        threshold retained.

        rtilde:
            The estimated mean distribution.

        eigenvalues, eigenvectors:
            All eigenpairs, eigenvalues in descending order and eigenvectors
            as the matching columns.

        threshold:
            Eigenvalues >= threshold are retained; kprime counts them.

        max_rank:
            If not None, at most this many of the largest eigenpairs are
            retained. above_threshold keeps the uncapped count.
    """
    def __init__(self, rtilde, eigenvalues, eigenvectors, threshold,
                 max_rank=None):
        self.rtilde = np.asarray(rtilde, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors, dtype=float)
        self.threshold = float(threshold)
        self.above_threshold = int(np.sum(self.eigenvalues >= self.threshold))
        self.kprime = self.above_threshold
        if max_rank is not None:
            self.kprime = min(self.kprime, max(int(max_rank), 0))

    @property
    def dropped(self):
        """ Eigenvalues above the threshold left out by the rank cap.
        """
        return self.above_threshold - self.kprime

    @property
    def n(self):
        return len(self.rtilde)

    @property
    def retained(self):
        """ n x kprime matrix of the retained eigenvectors.
        """
        return self.eigenvectors[:, :self.kprime]

    def Atilde(self):
        """ The PSD estimate sum over retained pairs of lambda v v'.
        """
        V = self.retained
        return (V * self.eigenvalues[:self.kprime]).dot(V.T)

    def to_json(self):
        return {'threshold': self.threshold, 'kprime': self.kprime,
                'rtilde': self.rtilde.tolist(),
                'eigenvalues': self.eigenvalues[:self.kprime].tolist(),
                'eigenvectors': self.retained.T.tolist()}


def empirical_M(batch, n):
    """ M_ij = half the combined frequency of the 2-snapshots (i, j) and
        (j, i); the diagonal holds the frequency of (i, i).
    """
    input_assert(len(batch) > 0, 'cannot estimate M from an empty batch')
    input_assert(batch.aperture == 2,
                 'empirical_M needs 2-snapshots, got aperture %d' %
                 batch.aperture)
    rows = batch.rows
    input_assert(rows.max() < n, 'snapshot item outside a domain of %d' % n)
    counts = np.bincount(rows[:, 0] * n + rows[:, 1],
                         minlength=n * n).reshape(n, n)
    return (counts + counts.T) / (2.0 * len(batch))


def exact_M(src):
    """ The exact 2-snapshot matrix of a known source.
    """
    return src.second_moment_matrix()


def estimate_A(Mtilde, rtilde, zeta, max_rank=None):
    """ Eigen-decompose Mtilde - rtilde rtilde' and keep the eigenpairs at or
        above zeta^2 / 2n, at most max_rank of them when it is given.
    """
    Mtilde = np.asarray(Mtilde, dtype=float)
    rtilde = np.asarray(rtilde, dtype=float).ravel()
    n = len(rtilde)
    input_assert(Mtilde.shape == (n, n),
                 'M has shape %r, expected %d x %d' % (Mtilde.shape, n, n))
    input_assert(np.allclose(Mtilde, Mtilde.T, rtol=0, atol=1e-12),
                 'M must be symmetric')
    D = Mtilde - np.outer(rtilde, rtilde)
    D = 0.5 * (D + D.T)
    eigenvalues, eigenvectors = np.linalg.eigh(D)
    order = np.argsort(eigenvalues)[::-1]
    sub = SpectralSubspace(rtilde, eigenvalues[order], eigenvectors[:, order],
                           threshold=zeta ** 2 / (2.0 * n),
                           max_rank=max_rank)
    log.debug('spectral: kprime=%d, threshold=%.4g, top eigenvalues %s',
              sub.kprime, sub.threshold,
              np.array2string(sub.eigenvalues[:sub.kprime + 1], precision=4))
    if sub.dropped:
        log.info('spectral: %d of %d eigenvalues above %.4g dropped by the '
                 'rank cap %d', sub.dropped, sub.above_threshold,
                 sub.threshold, sub.kprime)
    return sub


def random_basis(sub, rng):
    """ A uniformly random orthonormal basis (as n x kprime columns) of the
        retained eigenspace.
    """
    if sub.kprime == 0:
        raise DegenerateMixtureError(
            'no eigenvalue above the threshold; the mixture looks like a '
            'single distribution')
    gen = rng.generator()
    G = gen.standard_normal((sub.kprime, sub.kprime))
    Q, R = np.linalg.qr(G)
    # Fixing the signs of R's diagonal makes Q Haar distributed
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return sub.retained.dot(Q * signs)


def projector_distance(U, V):
    """ Operator norm of the difference of the orthogonal projectors on the
        spans of the orthonormal columns of U and of V.
    """
    U = _as_columns(U)
    V = _as_columns(V)
    input_assert(U.shape[0] == V.shape[0], 'vectors of different lengths')
    for X in (U, V):
        input_assert(np.allclose(X.T.dot(X), np.eye(X.shape[1]), rtol=0,
                                 atol=ORTHONORMAL_TOL),
                     'projector_distance expects orthonormal vectors')
    return float(np.linalg.norm(U.dot(U.T) - V.dot(V.T), 2))


def _as_columns(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X
