#-------------------------------------------------------------------------------
# snapmix: mixture/learner.py
#
# The mixture learner: the direction program and the rescaled one-dimensional
# learner for a single direction, the matching of spikes learned along a
# random basis and along test directions, and the full pipeline from
# snapshots (or exact statistics) to a learned mixture source.
#-------------------------------------------------------------------------------
from collections import namedtuple
import logging
import math

import numpy as np

from ..common.exceptions import ConfigError, MatchingError
from ..common.lp import solve_lp
from ..common.utils import input_assert, config_assert, internal_assert
from ..onedim.kspike import KSpikeConfig, learn_kspike_from_nbm, estimate_xi
from ..onedim.moments import nbm_of, ones_histogram, nbm_from_histogram
from .isotropy import estimate_r
from .sampling import project_batch, binarize_batch, map_blocks
from .source import MixtureSource, KSpikeDistribution
from .spectral import estimate_A, empirical_M, exact_M, random_basis

log = logging.getLogger(__name__)

# Bisection steps on the l-infinity cap of the direction program
DIRECTION_BISECTION_STEPS = 40

# Redraws of the test angle after a failed matching
MATCHING_RETRIES = 8

# Moment error assumed for exact (oracle) statistics
ORACLE_XI = 1e-12

# Normalization tolerance of learned sources, which went through an LP
LEARNED_TOL = 1e-9


class LearnerConstants(object):
    """ Constants of one learner run.

        n, k:
            Domain size and number of constituents.

        zeta:
            Width of the mixture.

        omega:
            Confidence parameter (> 1); the failure probability is about
            k / omega.

        delta:
            Accuracy of the direction program; the constraint is
            v'x >= 1 - 4 delta / zeta^2.

        w_min:
            Lower bound on the mixture weights.

        varsigma:
            Sample-accuracy parameter of a single direction, only used to
            log the error bound of the rescaled learner. May be None.
    """
    def __init__(self, n, k, zeta, omega, delta, w_min, varsigma=None):
        config_assert(n >= 1 and k >= 1, 'n and k must be positive')
        config_assert(zeta > 0, 'zeta must be positive, got %r' % zeta)
        config_assert(omega > 1, 'omega must exceed 1, got %r' % omega)
        config_assert(0 < delta < 1, 'delta must lie in (0, 1), got %r' % delta)
        config_assert(0 < w_min <= 1.0 / k,
                      'w_min must lie in (0, 1/k], got %r' % w_min)
        self.n = int(n)
        self.k = int(k)
        self.zeta = float(zeta)
        self.omega = float(omega)
        self.delta = float(delta)
        self.w_min = float(w_min)
        self.varsigma = varsigma

        self.T = 3.0 * self.omega * self.k ** 4
        self.H = 4.0 / (self.w_min ** 2 * self.zeta * math.sqrt(self.n))
        self.L = self.zeta / (64.0 * self.omega ** 1.5 * self.k ** 4 *
                              math.sqrt(self.n))
        self.match_tol = (math.sqrt(2) + 1) * self.L / (2 + 5 * self.T)
        self.delta_bound = (self.w_min ** 3 * self.zeta ** 4 /
                            (2.0 ** 29 * self.omega ** 5 * self.k ** 16))
        self.delta_warning = self.delta > self.delta_bound
        if self.delta_warning:
            log.warning('delta=%.3g exceeds %.3g; the guarantees of the '
                        'direction program do not apply', self.delta,
                        self.delta_bound)

    def to_json(self):
        return {'n': self.n, 'k': self.k, 'zeta': self.zeta,
                'omega': self.omega, 'delta': self.delta, 'w_min': self.w_min,
                'varsigma': self.varsigma, 'T': self.T, 'H': self.H,
                'L': self.L, 'match_tol': self.match_tol,
                'delta_bound': self.delta_bound,
                'delta_warning': self.delta_warning}

    def __repr__(self):
        return 'LearnerConstants(n=%d, k=%d, T=%.4g, H=%.4g, L=%.4g)' % (
            self.n, self.k, self.T, self.H, self.L)


# v: the direction asked for
# a: unit vector returned by the direction program
# spikes: KSpikeDistribution with the learned weights and rescaled locations,
#         estimates of the projections v'p^t
# scale: S such that the snapshots were projected on 1/2 + a / 2S
# raw: the learned distribution on [0, 1] before rescaling
DirectionResult = namedtuple('DirectionResult', 'v a spikes scale raw')


class Matching(object):
    """ Maps from the spikes of the last basis direction to the spikes of
        every basis direction.

        maps:
            kprime integer arrays of length k; maps[j][t] is the index of the
            spike of direction j that belongs with spike t of the last
            direction. The last map is the identity.
    """
    def __init__(self, maps):
        self.maps = [np.asarray(m, dtype=np.int64) for m in maps]

    @property
    def kprime(self):
        return len(self.maps)

    def __getitem__(self, j):
        return self.maps[j]

    def to_json(self):
        return [m.tolist() for m in self.maps]

    def __repr__(self):
        return 'Matching(%r)' % self.to_json()


# source: the learned MixtureSource
# degenerate: True if no direction of spread was found (kprime = 0)
# kprime: dimension of the estimated span of the constituents
# theta: the test angle that produced the matching (None if not needed)
# attempts: number of test angles drawn
# constants: the LearnerConstants of the run
# subspace: the SpectralSubspace
# directions: DirectionResults of the basis directions
LearnedMixture = namedtuple('LearnedMixture',
    'source degenerate kprime theta attempts constants subspace directions')


class ExactStatistics(object):
    """ Exact statistics of a known source, for oracle runs: the mean, the
        2-snapshot matrix and the NBMs of the binarized projection on any
        vector of [0, 1]^n.
    """
    sampled = False

    def __init__(self, src):
        self.src = src
        self.n = src.n

    def rtilde(self):
        return self.src.mean()

    def Mtilde(self):
        return exact_M(self.src)

    def reserve(self, slots):
        pass

    def direction_nbm(self, x, k, slot, rng):
        """ (NBM vector, None): a binarized projected snapshot holds i ones
            with the probability of i successes among 2k-1 coins of bias x'p.
        """
        values = np.clip(self.src.constituents.dot(x), 0.0, 1.0)
        d = KSpikeDistribution(self.src.weights, values)
        return nbm_of(d, k), None


class SampledStatistics(object):
    """ Statistics estimated from three batches of snapshots.

        batch1, batch2, batch_hi:
            SnapshotBatches of apertures 1, 2 and 2k-1 over [n].

        n:
            Domain size.

        threads:
            Worker threads for binarization.
    """
    sampled = True

    def __init__(self, batch1, batch2, batch_hi, n, threads=1):
        input_assert(len(batch1) > 0 and len(batch2) > 0 and len(batch_hi) > 0,
                     'the learner needs nonempty snapshot batches')
        input_assert(batch1.aperture == 1 and batch2.aperture == 2,
                     'expected batches of apertures 1 and 2, got %d and %d' % (
                         batch1.aperture, batch2.aperture))
        self.batch1 = batch1
        self.batch2 = batch2
        self.batch_hi = batch_hi
        self.n = int(n)
        self.threads = threads
        self._parts = None

    def rtilde(self):
        return estimate_r(self.batch1, self.n)

    def Mtilde(self):
        return empirical_M(self.batch2, self.n)

    def reserve(self, slots):
        """ Split the high-aperture batch evenly among 'slots' directions.
        """
        input_assert(len(self.batch_hi) >= slots,
                     '%d snapshots cannot feed %d directions' % (
                         len(self.batch_hi), slots))
        self._parts = self.batch_hi.split(slots)

    def direction_nbm(self, x, k, slot, rng):
        """ (NBM vector, xi estimate) from the snapshots reserved for 'slot',
            projected on x and binarized.
        """
        internal_assert(self._parts is not None, 'batches were not reserved')
        part = self._parts[slot]
        input_assert(part.aperture == 2 * k - 1,
                     'expected %d-snapshots, got aperture %d' % (
                         2 * k - 1, part.aperture))
        bits = binarize_batch(project_batch(part, x), rng,
                              threads=self.threads)
        hist = ones_histogram(bits, k)
        return nbm_from_histogram(hist, k), estimate_xi(hist, k)


def solve_direction_program(v, delta, zeta):
    """ The unit vector a = x*/||x*|| where x* minimizes ||x||_inf subject to
        v'x >= 1 - 4 delta / zeta^2 and ||x||_2 <= 1.

        Bisection on the cap u = ||x||_inf: for a fixed cap the largest v'x
        has a closed form, and it increases with u.
    """
    v = np.asarray(v, dtype=float).ravel()
    input_assert(abs(np.linalg.norm(v) - 1.0) <= 1e-8,
                 'direction must be a unit vector (norm %r)' %
                 np.linalg.norm(v))
    c = 1.0 - 4.0 * delta / zeta ** 2
    if c <= 0:
        raise ConfigError('4 delta / zeta^2 = %.3g leaves the direction '
                          'program without content' % (1 - c))

    lo, hi = 0.0, float(np.abs(v).max())
    x = v.copy()
    for _ in range(DIRECTION_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        cand = _best_capped(v, mid)
        if v.dot(cand) >= c:
            hi, x = mid, cand
        else:
            lo = mid
    a = x / np.linalg.norm(x)
    log.debug('direction program: ||x||_inf=%.6g, v\'x=%.12g, ||a||_inf=%.6g',
              np.abs(x).max(), v.dot(x), np.abs(a).max())
    return a


def learn_direction(v, stats, consts, rng, slot=0, tight_scale=False,
                    tau=None):
    """ Learn the projections of the constituents on the unit vector v.

        The snapshots are projected on 1/2 + a / 2S, where a solves the
        direction program and S = H (or ||a||_inf with tight_scale), then
        binarized and handed to the one-dimensional learner. A learned
        location beta (shifted back by 1/2) becomes 2 S beta (a'v).
    """
    k = consts.k
    a = solve_direction_program(v, consts.delta, consts.zeta)
    a_inf = float(np.abs(a).max())
    if tight_scale:
        S = a_inf
    else:
        S = consts.H
        if a_inf > consts.H:
            log.warning('||a||_inf=%.4g exceeds H=%.4g; rescaling by '
                        '||a||_inf', a_inf, consts.H)
            S = a_inf
    x = np.clip(0.5 + a / (2.0 * S), 0.0, 1.0)

    nu, xi_est = stats.direction_nbm(x, k, slot, rng)
    if tau is None:
        tau = consts.L / (4.0 * S)
    tau = min(tau, 1.0)
    xi = ORACLE_XI if xi_est is None else xi_est
    xi = min(xi, tau ** (2 * k))
    raw = learn_kspike_from_nbm(nu, KSpikeConfig(k, tau, xi))

    gamma = 2.0 * S * (raw.locations - 0.5) * a.dot(v)
    spikes = KSpikeDistribution(raw.weights, gamma, bounded=False,
                                tol=LEARNED_TOL)
    if consts.varsigma is not None:
        log.debug('direction %d: location error bound %.4g', slot,
                  2048 * k * consts.H * consts.varsigma / consts.w_min +
                  consts.L / (8 * consts.T))
    log.debug('direction %d: scale %.4g, tau %.3g, xi %.3g, locations %s',
              slot, S, tau, xi, np.array2string(gamma, precision=6))
    return DirectionResult(v=v, a=a, spikes=spikes, scale=S, raw=raw)


def match_spikes(alphas, last, zhats, theta, tol):
    """ Match the spikes of every basis direction with those of the last one.

        alphas:
            For j < kprime-1, the spike locations learned along b_j.

        last:
            The spike locations learned along b_kprime.

        zhats:
            For j < kprime-1, the spike locations learned along
            z_j = b_j cos(theta) + b_kprime sin(theta).

        tol:
            Matching threshold.

        Spike t2 of the last direction is matched to spike t1 of direction
        j when some spike of zhats[j] lies within tol of
        alphas[j][t1] cos(theta) + last[t2] sin(theta). Every t2 needs
        exactly one partner and the partners must be distinct; otherwise
        MatchingError is raised.
    """
    last = np.asarray(last, dtype=float)
    k = len(last)
    maps = []
    for j, (alpha, zhat) in enumerate(zip(alphas, zhats)):
        alpha = np.asarray(alpha, dtype=float)
        zhat = np.asarray(zhat, dtype=float)
        grid = (alpha[:, None] * math.cos(theta) +
                last[None, :] * math.sin(theta))
        gap = np.abs(grid[:, :, None] - zhat[None, None, :]).min(axis=2)
        hits = gap <= tol
        rho = np.empty(k, dtype=np.int64)
        for t2 in range(k):
            cands = np.nonzero(hits[:, t2])[0]
            if len(cands) != 1:
                raise MatchingError(
                    'direction %d: spike %d of the last direction has %d '
                    'candidate partners' % (j, t2, len(cands)))
            rho[t2] = cands[0]
        if len(set(rho.tolist())) != k:
            raise MatchingError('direction %d: matching %r is not a '
                                'bijection' % (j, rho.tolist()))
        maps.append(rho)
    maps.append(np.arange(k))
    return Matching(maps)


def reconstruct_constituents(rtilde, basis, alphas, matching):
    """ p^t = rtilde + sum_j (alphas[j][matching[j][t]] - b_j'rtilde) b_j for
        every spike t of the last direction. Returns a k x n array.
    """
    rtilde = np.asarray(rtilde, dtype=float).ravel()
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    kprime = basis.shape[1]
    input_assert(len(alphas) == kprime == matching.kprime,
                 'need one spike set and one map per basis vector')
    k = len(matching[kprime - 1])
    coords = np.empty((k, kprime))
    for j in range(kprime):
        coords[:, j] = np.asarray(alphas[j])[matching[j]]
    return rtilde + (coords - basis.T.dot(rtilde)).dot(basis.T)


def simplex_project_l1(phat, method='lp'):
    """ A probability vector x minimizing ||x - phat||_1.

        method:
            'lp' solves the linear program; 'fast' clips negative entries
            and then either spreads the missing mass evenly or lowers the
            positive entries by a common water level.
    """
    phat = np.asarray(phat, dtype=float).ravel()
    n = len(phat)
    input_assert(n >= 1, 'cannot project an empty vector')
    if method == 'fast':
        return _simplex_project_l1_fast(phat)
    input_assert(method == 'lp', 'unknown projection method %r' % (method,))

    # Variables [x, d+, d-] with x - d+ + d- = phat and sum(x) = 1
    I = np.eye(n)
    A_eq = np.zeros((n + 1, 3 * n))
    A_eq[:n] = np.hstack([I, -I, I])
    A_eq[n, :n] = 1.0
    b_eq = np.append(phat, 1.0)
    c = np.concatenate([np.zeros(n), np.ones(2 * n)])
    res = solve_lp(c, A_eq=A_eq, b_eq=b_eq)
    x = np.maximum(res.x[:n], 0.0)
    return x / x.sum()


def learn_mixture(stats, consts, rng, tight_scale=False, match_tol=None,
                  tau=None, projection='lp', retries=MATCHING_RETRIES,
                  threads=1):
    """ Learn a k-mixture source from 'stats' (ExactStatistics or
        SampledStatistics).

        The mean and the 2-snapshot matrix give the span of the
        constituents; a random orthonormal basis b_1 .. b_kprime of it is
        learned direction by direction, the directions are matched through
        the test directions z_j, and each matched combination is projected
        back onto the simplex.

        Returns a LearnedMixture. Raises MatchingError when no test angle
        gives a valid matching within 'retries' draws.
    """
    k = consts.k
    input_assert(stats.n == consts.n, 'statistics over %d items, constants '
                 'for %d' % (stats.n, consts.n))
    rtilde = stats.rtilde()
    # The constituents span at most k-1 directions around their mean
    sub = estimate_A(stats.Mtilde(), rtilde, consts.zeta, max_rank=k - 1)
    kprime = sub.kprime
    if sub.dropped:
        log.warning('%d eigenvalues above the threshold for a %d-mixture; '
                    'keeping the largest %d', sub.above_threshold, k, kprime)
    if kprime == 0:
        log.warning('no direction of spread above %.3g; returning the mean '
                    'distribution for every constituent', sub.threshold)
        P = np.tile(rtilde / rtilde.sum(), (k, 1))
        src = MixtureSource(np.full(k, 1.0 / k), P, tol=LEARNED_TOL)
        return LearnedMixture(source=src, degenerate=True, kprime=0,
                              theta=None, attempts=0, constants=consts,
                              subspace=sub, directions=[])
    basis = random_basis(sub, rng.child(0))
    stats.reserve(2 * kprime - 1)
    kw = dict(tight_scale=tight_scale, tau=tau)

    def learn_basis(j):
        return learn_direction(basis[:, j], stats, consts, rng.child(2).child(j),
                               slot=j, **kw)

    directions = map_blocks(learn_basis, kprime, threads)
    alphas = [d.spikes.locations for d in directions]
    tol = consts.match_tol if match_tol is None else match_tol

    theta = None
    attempts = 0
    if kprime == 1:
        matching = Matching([np.arange(k)])
    else:
        last = basis[:, kprime - 1]
        while True:
            attempts += 1
            theta = float(rng.child(1).generator(attempts).uniform(0, 2 * math.pi))

            def learn_test(j):
                z = basis[:, j] * math.cos(theta) + last * math.sin(theta)
                z /= np.linalg.norm(z)
                return learn_direction(
                    z, stats, consts, rng.child(3).child(attempts).child(j),
                    slot=kprime + j, **kw)

            tests = map_blocks(learn_test, kprime - 1, threads)
            try:
                matching = match_spikes(alphas[:-1], alphas[-1],
                                        [d.spikes.locations for d in tests],
                                        theta, tol)
                break
            except MatchingError as e:
                log.info('matching failed with theta=%.6f: %s', theta, e)
                if attempts >= retries:
                    raise MatchingError(
                        'no valid matching after %d test angles: %s' % (
                            attempts, e))

    phat = reconstruct_constituents(rtilde, basis, alphas, matching)
    P = np.array([simplex_project_l1(p, projection) for p in phat])
    wsum = np.zeros(k)
    for j, d in enumerate(directions):
        wsum += d.spikes.weights[matching[j]]
    w = wsum / kprime
    src = MixtureSource(w / w.sum(), P, tol=LEARNED_TOL)
    log.info('learned a %d-mixture over %d items (kprime=%d, %d test '
             'angle(s))', k, consts.n, kprime, attempts)
    return LearnedMixture(source=src, degenerate=False, kprime=kprime,
                          theta=theta, attempts=attempts, constants=consts,
                          subspace=sub, directions=directions)


def learn_mixture_exact(src, consts, rng, **kwargs):
    """ learn_mixture on the exact statistics of a known source.
    """
    return learn_mixture(ExactStatistics(src), consts, rng, **kwargs)


def run_manifest(result, seed=None):
    """ JSON-ready record of a learner run.
    """
    return {'seed': seed,
            'constants': result.constants.to_json(),
            'kprime': result.kprime,
            'degenerate': result.degenerate,
            'theta': result.theta,
            'attempts': result.attempts,
            'threshold': result.subspace.threshold,
            'above_threshold': result.subspace.above_threshold,
            'eigenvalues': result.subspace.eigenvalues[
                :result.kprime + 1].tolist(),
            'directions': [{'scale': d.scale,
                            'spikes': d.spikes.to_json()}
                           for d in result.directions],
            'model': result.source.to_json()}


#------------------------- PRIVATE -------------------------

def _best_capped(v, u):
    """ argmax of v'x over ||x||_inf <= u, ||x||_2 <= 1.

        The maximizer is x_i = sign(v_i) min(u, |v_i| / mu), with mu = 0 (all
        entries at the cap) when that point already lies in the ball.
    """
    s = np.sign(v)
    mags = np.abs(v)
    nnz = int(np.count_nonzero(mags))
    if nnz * u * u <= 1.0:
        return u * s
    order = np.argsort(-mags, kind='stable')
    sorted_mags = mags[order]
    tail = np.cumsum((sorted_mags ** 2)[::-1])[::-1]
    # With the j largest entries capped, the rest are |v_i| / mu
    for j in range(nnz):
        room = 1.0 - j * u * u
        if room <= 0:
            break
        mu = math.sqrt(tail[j] / room)
        if sorted_mags[j] / mu <= u and (j == 0 or
                                         sorted_mags[j - 1] / mu >= u):
            return s * np.minimum(u, mags / mu)
    # Rounding can defeat the exact tests above; fall back to the cap
    return s * np.minimum(u, mags / math.sqrt(tail[0]))


def _simplex_project_l1_fast(phat):
    x = np.maximum(phat, 0.0)
    total = x.sum()
    if total <= 1.0:
        return x + (1.0 - total) / len(x)
    # Lower the positive entries by a common level lam with sum = 1
    u = np.sort(x)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, len(u) + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    lam = cssv[rho - 1] / rho
    return np.maximum(x - lam, 0.0)
