#-------------------------------------------------------------------------------
# snapmix: onedim/lowerbounds.py
#
# Executable lower-bound constructions: pairs of k-spike distributions whose
# first 2k-2 moments agree, so that their snapshots of aperture up to 2k-2 are
# identically distributed and wider snapshots are nearly so.
#-------------------------------------------------------------------------------
from collections import namedtuple
import itertools
import logging
import math

import numpy as np

from ..common.lp import solve_lp
from ..common.utils import input_assert, internal_assert
from ..mixture.source import KSpikeDistribution
from .moments import moments_of, pascal_entries

log = logging.getLogger(__name__)

# The first 2k-2 moments of a hard pair are certified equal to this tolerance
MOMENT_MATCH_TOL = 1e-8

# tv_snapshot_distance enumerates {0,1}^b up to this aperture
MAX_BRUTE_FORCE_APERTURE = 14

# first, second: the two KSpikeDistributions
# lp_value: optimal value of the moment-matching LP
HardPair = namedtuple('HardPair', 'k b rho first second lp_value')

# closed_form: 1/2 sum_{l=2k-1}^{b} C(b,l) 2^l |g_l - g'_l| (None if the first
#              2k-2 moments differ); exact for b = 2k-1, an upper bound above
# exact: 1/2 sum_i C(b,i) |nu_i - nu'_i| over the aperture-b NBMs
# brute_force: 1/2 ||dist - dist'||_1 enumerated over {0,1}^b (None if b > 14)
TVReport = namedtuple('TVReport', 'closed_form exact brute_force')


def hard_pair(k, b, rho):
    """ Build two k-spike distributions with spikes
        a_i = 2(i-1) / ((2k-1) rho) and b_i = (2i-1) / ((2k-1) rho), whose
        weights solve the LP

            min  sum_{l=2k-1}^{b} C(b,l) 2^l lam_l
            s.t. g_l(second) - g_l(first) = 0          l = 0 .. 2k-2
                 |g_l(second) - g_l(first)| <= lam_l    l = 2k-1 .. b
                 sum(y) = 1, y, z >= 0
    """
    input_assert(k >= 1, 'k must be at least 1')
    input_assert(b >= 2 * k - 1, 'aperture b=%d is below 2k-1=%d' % (b, 2 * k - 1))
    input_assert(rho >= 2, 'rho must be at least 2')
    eps = 1.0 / rho
    i = np.arange(1, k + 1)
    alpha = eps * 2 * (i - 1) / (2.0 * k - 1)
    beta = eps * (2 * i - 1) / (2.0 * k - 1)

    high = list(range(2 * k - 1, b + 1))
    nlam = len(high)
    nvars = 2 * k + nlam
    # Variables [y, z, lam]
    A_eq = np.zeros((2 * k, nvars))
    for l in range(2 * k - 1):
        A_eq[l, :k] = -alpha ** l
        A_eq[l, k:2 * k] = beta ** l
    A_eq[2 * k - 1, :k] = 1.0
    b_eq = np.zeros(2 * k)
    b_eq[-1] = 1.0

    A_ub = np.zeros((2 * nlam, nvars))
    for row, l in enumerate(high):
        diff = np.concatenate([-alpha ** l, beta ** l])
        A_ub[2 * row, :2 * k] = diff
        A_ub[2 * row + 1, :2 * k] = -diff
        A_ub[2 * row, 2 * k + row] = -1.0
        A_ub[2 * row + 1, 2 * k + row] = -1.0
    b_ub = np.zeros(2 * nlam)
    c = np.zeros(nvars)
    c[2 * k:] = [math.comb(b, l) * 2.0 ** l for l in high]

    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    # The 2k equality rows determine the weights; one Newton step polishes the
    # simplex solution
    W = A_eq[:, :2 * k]
    x = res.x[:2 * k]
    refined = x + np.linalg.solve(W, b_eq - W.dot(x))
    if np.all(refined >= 0):
        x = refined
    y = x[:k] / x[:k].sum()
    z = x[k:] / x[k:].sum()
    first = KSpikeDistribution(y, alpha)
    second = KSpikeDistribution(z, beta)

    # Certify from the weights rather than from the LP residuals
    gap = np.abs(moments_of(first, 2 * k - 1).values -
                 moments_of(second, 2 * k - 1).values).max()
    internal_assert(gap <= MOMENT_MATCH_TOL,
                    'hard pair moments differ by %.3e' % gap)
    bound = 4.0 * 3.0 ** b / rho ** (2 * k - 1)
    internal_assert(res.value <= bound * (1 + 1e-9),
                    'LP value %r above the bound %r' % (res.value, bound))
    log.debug('hard pair k=%d b=%d rho=%r: LP value %.6g (bound %.6g), '
              'moment gap %.3e', k, b, rho, res.value, bound, gap)
    return HardPair(k=k, b=b, rho=rho, first=first, second=second,
                    lp_value=res.value)


def snapshot_distribution(d, b):
    """ Probabilities of every b-bit snapshot of the coin mixture d, indexed
        like itertools.product((0, 1), repeat=b).
    """
    if b == 0:
        return np.ones(1)
    bits = np.array(list(itertools.product((0, 1), repeat=b)))
    ones = bits.sum(axis=1)
    a = d.locations[None, :]
    probs = a ** ones[:, None] * (1.0 - a) ** (b - ones)[:, None]
    return probs.dot(d.weights)


def aperture_nbm(d, b):
    """ The b+1 aperture-b NBMs sum_j w_j a_j^i (1 - a_j)^(b-i).
    """
    a = d.locations[:, None]
    i = np.arange(b + 1)[None, :]
    return d.weights.dot(a ** i * (1.0 - a) ** (b - i))


def tv_snapshot_distance(d1, d2, b, closed_form=True):
    """ Total variation between the b-snapshot distributions of two coin
        mixtures. See TVReport for the three quantities returned.

        With closed_form=True both distributions must have k spikes and agree
        on their first 2k-2 moments.
    """
    input_assert(b >= 0, 'aperture must be nonnegative')
    binom = np.array([math.comb(b, i) for i in range(b + 1)], dtype=float)
    exact = 0.5 * np.sum(binom * np.abs(aperture_nbm(d1, b) -
                                        aperture_nbm(d2, b)))

    closed = None
    if closed_form:
        k = max(d1.k, d2.k)
        input_assert(b >= 2 * k - 1,
                     'closed form needs b >= 2k-1 (b=%d, k=%d)' % (b, k))
        g1 = moments_of(d1, b + 1).values
        g2 = moments_of(d2, b + 1).values
        low = np.abs(g1[:2 * k - 1] - g2[:2 * k - 1])
        input_assert(low.size == 0 or low.max() <= MOMENT_MATCH_TOL,
                     'closed form needs the first 2k-2 moments to agree '
                     '(gap %.3e)' % (low.max() if low.size else 0.0))
        l = np.arange(2 * k - 1, b + 1)
        closed = 0.5 * np.sum(binom[l] * 2.0 ** l * np.abs(g1[l] - g2[l]))

    brute = None
    if b <= MAX_BRUTE_FORCE_APERTURE:
        brute = 0.5 * np.abs(snapshot_distribution(d1, b) -
                             snapshot_distribution(d2, b)).sum()
    return TVReport(closed_form=closed, exact=float(exact),
                    brute_force=None if brute is None else float(brute))


def aperture_indistinguishability(pair, m):
    """ Total variation between the m-snapshot distributions of a hard pair,
        by enumeration of {0,1}^m. For m <= 2k-2 it vanishes up to LP
        round-off.
    """
    input_assert(m >= 0, 'aperture must be nonnegative')
    if m > 2 * pair.k - 2:
        log.debug('aperture %d exceeds 2k-2=%d; the pair is distinguishable',
                  m, 2 * pair.k - 2)
    if m > MAX_BRUTE_FORCE_APERTURE:
        return tv_snapshot_distance(pair.first, pair.second, m,
                                    closed_form=False).exact
    return float(0.5 * np.abs(snapshot_distribution(pair.first, m) -
                              snapshot_distribution(pair.second, m)).sum())


def sample_size_bound(pair, psi):
    """ Number of b-snapshots any procedure needs to tell the two halves of
        the pair apart with failure probability psi:
        rho^(2k-1) / (8 3^b) ln(1 / 4 psi), floored at 0.
    """
    input_assert(0 < psi < 1, 'psi must lie in (0, 1)')
    k, b, rho = pair.k, pair.b, pair.rho
    bound = rho ** (2 * k - 1) / (8.0 * 3.0 ** b) * math.log(1.0 / (4.0 * psi))
    return max(0.0, bound)


def pascal_inverse_check(b):
    """ True if Pas_{b+1} Q = I exactly, with Q[i, j] = (-1)^(i-j) C(b-j, i-j).
    """
    pas = np.array(pascal_entries(b + 1), dtype=object)
    Q = np.array(pascal_entries(b + 1, signed=True), dtype=object)
    prod = pas.dot(Q)
    return all(prod[i, j] == (1 if i == j else 0)
               for i in range(b + 1) for j in range(b + 1))
