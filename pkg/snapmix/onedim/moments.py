#-------------------------------------------------------------------------------
# snapmix: onedim/moments.py
#
# Raw moments and normalized binomial moments (NBMs) of k-spike
# distributions, the Pascal matrix that converts between the two, and the
# interpolation utilities used to study the moment curve.
#-------------------------------------------------------------------------------
from collections import namedtuple
import math

import numpy as np
from numpy.polynomial import polynomial as P

from ..common.utils import input_assert

# Largest Pascal matrix materialized as int64; C(59, 29) < 2^63
MAX_PASCAL_SIZE = 60

MOMENT_KINDS = ('raw', 'nbm')


class MomentVector(object):
    """ A vector of moments of a spike distribution; the learner works with
        2k of them.

        kind:
            'raw' for g_i = sum_j w_j a_j^i, 'nbm' for the normalized
            binomial moments nu_i = sum_j w_j a_j^i (1 - a_j)^(b-1-i) with b
            the length of the vector.

        values:
            The moments, i = 0 .. b-1.
    """
    def __init__(self, kind, values):
        input_assert(kind in MOMENT_KINDS, 'unknown moment kind %r' % (kind,))
        values = np.array(values, dtype=float).ravel()
        input_assert(len(values) >= 1, 'empty moment vector')
        values.setflags(write=False)
        self.kind = kind
        self.values = values

    @property
    def k(self):
        return len(self.values) // 2

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return 'MomentVector(%r, %r)' % (self.kind, self.values.tolist())


# b: matrix size
# pas: lower-triangular int64 matrix, pas[i, j] = C(b-1-j, i-j)
# inv: its inverse, inv[i, j] = (-1)^(i-j) C(b-1-j, i-j)
PascalPair = namedtuple('PascalPair', 'b pas inv')


def pascal_entries(b, signed=False):
    """ The b x b Pascal matrix as nested lists of Python ints (exact for
        any b). With signed=True, the entries of its inverse.
    """
    rows = []
    for i in range(b):
        row = []
        for j in range(b):
            if j > i:
                row.append(0)
            else:
                c = math.comb(b - 1 - j, i - j)
                row.append(-c if signed and (i - j) % 2 else c)
        rows.append(row)
    return rows


def pascal_pair(b):
    """ Pascal matrix of size b and its integer inverse. For b = 2k this maps
        NBMs to raw moments: g = nu . pas.
    """
    input_assert(b >= 1, 'Pascal matrix size must be positive')
    input_assert(b <= MAX_PASCAL_SIZE,
                 'Pascal matrix of size %d overflows 64-bit integers '
                 '(max %d)' % (b, MAX_PASCAL_SIZE))
    pas = np.array(pascal_entries(b), dtype=np.int64)
    inv = np.array(pascal_entries(b, signed=True), dtype=np.int64)
    return PascalPair(b=b, pas=pas, inv=inv)


def pascal_frobenius_squared(k):
    """ Exact squared Frobenius norm of the 2k x 2k Pascal matrix,
        sum_{m=0}^{2k-1} C(2m, m).
    """
    return sum(math.comb(2 * m, m) for m in range(2 * k))


def moments_of(d, count=None):
    """ Raw moments g_0 .. g_{count-1} of a k-spike distribution; count
        defaults to 2k.
    """
    count = 2 * d.k if count is None else count
    V = np.vander(d.locations, count, increasing=True)
    return MomentVector('raw', d.weights.dot(V))


def nbm_of(d, k=None):
    """ The 2k normalized binomial moments of a spike distribution (k
        defaults to its number of spikes).
    """
    k = d.k if k is None else k
    return MomentVector('nbm', d.weights.dot(nbm_matrix(d.locations, 2 * k)))


def nbm_matrix(locations, b):
    """ The len(locations) x b matrix with entries a_i^j (1 - a_i)^(b-1-j).
    """
    a = np.asarray(locations, dtype=float)[:, None]
    j = np.arange(b)[None, :]
    return a ** j * (1.0 - a) ** (b - 1 - j)


def ones_histogram(bits, k):
    """ Counts of the (2k-1)-bit snapshots holding exactly i ones, i = 0..2k-1.
    """
    bits = np.atleast_2d(np.asarray(bits))
    if bits.size == 0:
        return np.zeros(2 * k, dtype=np.int64)
    input_assert(bits.shape[1] == 2 * k - 1,
                 'expected %d-bit snapshots, got %d bits' % (
                     2 * k - 1, bits.shape[1]))
    return np.bincount(bits.sum(axis=1).astype(np.int64), minlength=2 * k)


def nbm_from_histogram(hist, k):
    """ Empirical NBMs from the histogram of the number of ones.
    """
    hist = np.asarray(hist, dtype=float)
    N = hist.sum()
    input_assert(N > 0, 'empirical NBMs need at least one snapshot')
    binom = np.array([math.comb(2 * k - 1, i) for i in range(2 * k)],
                     dtype=float)
    return MomentVector('nbm', hist / (N * binom))


def empirical_nbm(bit_snapshots, k):
    """ nu_i = (# snapshots with i ones) / (N C(2k-1, i)).
    """
    input_assert(len(bit_snapshots) > 0,
                 'empirical NBMs need at least one snapshot')
    return nbm_from_histogram(ones_histogram(bit_snapshots, k), k)


def nbm_to_moments(nu):
    """ g = nu . Pas.
    """
    input_assert(nu.kind == 'nbm', 'expected an NBM vector')
    pas = pascal_pair(len(nu)).pas
    return MomentVector('raw', nu.values.dot(pas.astype(float)))


def moments_to_nbm(g):
    """ nu = g . Pas^-1.
    """
    input_assert(g.kind == 'raw', 'expected a raw moment vector')
    inv = pascal_pair(len(g)).inv
    return MomentVector('nbm', g.values.dot(inv.astype(float)))


def vandermonde(locations, b):
    """ The len(locations) x b matrix with entries a_i^j.
    """
    return np.vander(np.asarray(locations, dtype=float), b, increasing=True)


def interpolating_polynomial(points, values):
    """ Monomial coefficients (constant first) of the degree len(points)-1
        polynomial through (points[i], values[i]), built in Lagrange form.
    """
    points = np.asarray(points, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    input_assert(len(points) == len(values) and len(points) >= 1,
                 'need as many values as interpolation points')
    input_assert(len(np.unique(points)) == len(points),
                 'interpolation points must be distinct')
    coeffs = np.zeros(len(points))
    for i, x in enumerate(points):
        others = np.delete(points, i)
        basis = P.polyfromroots(others) if len(others) else np.ones(1)
        coeffs += values[i] * basis / np.prod(x - others)
    return coeffs
