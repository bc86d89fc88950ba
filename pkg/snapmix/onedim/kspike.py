#-------------------------------------------------------------------------------
# snapmix: onedim/kspike.py
#
# Learning a k-spike distribution on [0, 1] from (2k-1)-bit snapshots: an LP
# for the annihilating polynomial, its roots, then a simplex-constrained least
# squares fit of the weights.
#-------------------------------------------------------------------------------
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P

from ..common.exceptions import LPError, LPInfeasibleError, RootFindingError
from ..common.lp import solve_lp
from ..common.utils import input_assert, config_assert
from ..mixture.source import KSpikeDistribution
from .moments import (
    MomentVector, vandermonde, nbm_to_moments, empirical_nbm,
    pascal_frobenius_squared)

log = logging.getLogger(__name__)

# Raw moment vectors whose g_0 is further than this from 1 are rejected
G0_TOLERANCE = 0.1

# Root residual test: |p(z)| <= ROOT_RESIDUAL_TOL * sum_i |lambda_i| max(1,|z|)^i
ROOT_RESIDUAL_TOL = 1e-6
NEWTON_MAX_ITER = 50

# Relative and absolute margin over the smallest achievable ||G x||_1 when
# the slack of the annihilating-polynomial LP has to be raised
RESIDUAL_FLOOR_MARGIN = 1e-9

# Projected gradient for the weights
WEIGHTS_MAX_ITER = 100000
WEIGHTS_OBJECTIVE_TOL = 1e-12


class KSpikeConfig(object):
    """ Parameters of the one-dimensional learner.

        k:
            Number of spikes.

        tau:
            Minimum separation between spikes.

        xi:
            Bound on the l2 error of the empirical raw moments; at most
            tau^(2k).

        polish:
            Refine the fitted spikes by Gauss-Newton on the moment residual.
    """
    def __init__(self, k, tau, xi, polish=True):
        config_assert(k >= 1, 'k must be at least 1')
        config_assert(0 < tau <= 1, 'tau must lie in (0, 1], got %r' % tau)
        config_assert(xi >= 0, 'xi must be nonnegative')
        config_assert(xi <= tau ** (2 * k),
                      'xi=%r exceeds tau^2k=%r' % (xi, tau ** (2 * k)))
        self.k = int(k)
        self.tau = float(tau)
        self.xi = float(xi)
        self.polish = bool(polish)

    @property
    def eps_root(self):
        return eps_root(self.k, self.tau, self.xi)

    def __repr__(self):
        return 'KSpikeConfig(k=%d, tau=%r, xi=%r)' % (self.k, self.tau, self.xi)


def eps_root(k, tau, xi):
    """ Root accuracy (4 / tau) (2 k xi)^(1/k).
    """
    return 4.0 / tau * (2 * k * xi) ** (1.0 / k)


def solve_lambda(g, xi):
    """ Coefficients (constant first, leading 1) of the annihilating
        polynomial: minimize ||x||_1 subject to ||G x||_1 <= 2^k k xi and
        x_k = 1, where G[i, j] = g_{i+j} is k x (k+1).

        When xi understates the moment error and the leading k x k block of
        G is singular, no x meets the constraint. The slack is then raised
        to the smallest achievable ||G x||_1 and the program solved again.
    """
    input_assert(g.kind == 'raw', 'solve_lambda needs raw moments')
    input_assert(len(g) % 2 == 0, 'solve_lambda needs 2k moments')
    k = g.k
    gv = g.values
    input_assert(abs(gv[0] - 1.0) <= G0_TOLERANCE,
                 'moment g_0=%r is too far from 1; statistics look corrupt' %
                 gv[0])
    G = np.array([[gv[i + j] for j in range(k + 1)] for i in range(k)])
    Gk = G[:, :k]

    # Variables [x+, x-, e+, e-]; x = x+ - x- are the free coefficients and
    # e+ - e- the residual G x.
    Im = np.eye(k)
    A_eq = np.hstack([Gk, -Gk, -Im, Im])
    b_eq = -G[:, k]
    A_ub = np.concatenate([np.zeros(2 * k), np.ones(2 * k)])[None, :]
    slack = 2 ** k * k * xi
    c = np.concatenate([np.ones(2 * k), np.zeros(2 * k)])
    try:
        res = solve_lp(c, A_ub=A_ub, b_ub=[slack], A_eq=A_eq, b_eq=b_eq)
    except LPInfeasibleError:
        floor = _min_hankel_residual(A_eq, b_eq, k)
        relaxed = max(slack, floor * (1.0 + RESIDUAL_FLOOR_MARGIN) +
                      RESIDUAL_FLOOR_MARGIN)
        log.warning('annihilating-polynomial LP infeasible with slack %.3e; '
                    'using the residual floor %.3e', slack, relaxed)
        try:
            res = solve_lp(c, A_ub=A_ub, b_ub=[relaxed], A_eq=A_eq, b_eq=b_eq)
        except LPInfeasibleError as e:
            raise LPError('annihilating-polynomial LP infeasible at the '
                          'residual floor %.3e: %s' % (relaxed, e))
    lam = np.append(res.x[:k] - res.x[k:2 * k], 1.0)
    log.debug('lambda=%s (l1 %.6g)', lam.tolist(), np.abs(lam).sum())
    return lam


def polynomial_roots(lam, eps_root=None):
    """ The k roots of sum_i lam[i] x^i (leading coefficient 1), with real
        parts clamped to [0, 1] and sorted.

        Roots come from the companion-matrix eigenvalues, refined by Newton
        steps that are kept only while they reduce the residual. When
        eps_root is given, roots whose Newton error estimate exceeds it are
        logged.
    """
    lam = np.asarray(lam, dtype=float).ravel()
    input_assert(len(lam) >= 2, 'polynomial must have degree at least 1')
    input_assert(abs(lam[-1] - 1.0) <= 1e-12,
                 'polynomial must be monic, leading coefficient %r' % lam[-1])
    if not np.all(np.isfinite(lam)):
        raise RootFindingError('non-finite polynomial coefficients %r' %
                               lam.tolist())
    if len(lam) == 2:
        roots = np.array([-lam[0]], dtype=complex)
    else:
        roots = np.linalg.eigvals(P.polycompanion(lam)).astype(complex)
    dlam = P.polyder(lam)

    polished = []
    for z in roots:
        z = _newton_polish(z, lam, dlam)
        f = P.polyval(z, lam)
        scale = np.sum(np.abs(lam) * max(1.0, abs(z)) ** np.arange(len(lam)))
        if not np.isfinite(z) or abs(f) > ROOT_RESIDUAL_TOL * scale:
            raise RootFindingError(
                'root iteration did not converge: root %r, residual %.3e, '
                'coefficients %r' % (z, abs(f), lam.tolist()))
        if eps_root is not None:
            df = P.polyval(z, dlam)
            err = abs(f / df) if df != 0 else np.inf
            if err > eps_root:
                log.debug('root %r: error estimate %.3e above %.3e',
                          z, err, eps_root)
        polished.append(z)
    return np.sort(np.clip(np.real(polished), 0.0, 1.0))


def project_simplex(v):
    """ Euclidean projection of v onto the probability simplex (sort and
        threshold).
    """
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def solve_weights(alphas, g):
    """ Weights y on the simplex minimizing ||y V(alphas) - g||_2^2, where V is
        the k x 2k Vandermonde matrix of the spike locations.
    """
    alphas = np.asarray(alphas, dtype=float).ravel()
    k = len(alphas)
    if k == 1:
        return np.ones(1)
    gv = g.values if isinstance(g, MomentVector) else np.asarray(g, float)
    V = vandermonde(alphas, len(gv))
    Q = V.dot(V.T)
    c = V.dot(gv)

    def objective(y):
        r = y.dot(V) - gv
        return r.dot(r)

    # Accelerated projected gradient; the gradient of the objective is
    # 2 (Q y - c), Lipschitz with constant 2 lambda_max(Q).
    lip = 2.0 * np.linalg.eigvalsh(Q)[-1]
    y = np.full(k, 1.0 / k)
    z = y.copy()
    t = 1.0
    f = objective(y)
    for it in range(WEIGHTS_MAX_ITER):
        y_next = project_simplex(z - 2.0 * (Q.dot(z) - c) / lip)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = y_next + (t - 1.0) / t_next * (y_next - y)
        f_next = objective(y_next)
        if f_next > f:
            # Restart the momentum when the objective goes up
            z = y_next.copy()
            t_next = 1.0
        done = abs(f - f_next) < WEIGHTS_OBJECTIVE_TOL * max(1.0, f)
        y, t, f = y_next, t_next, min(f, f_next)
        if done and it > 10:
            break

    y = _polish_on_support(y, Q, c, objective)
    y = np.maximum(y, 0.0)
    return y / y.sum()


def estimate_xi(hist, k):
    """ One-standard-error estimate of ||g~ - g||_2 from the histogram of
        the number of ones: the multinomial standard error of the empirical
        NBMs scaled by the Frobenius norm of the Pascal matrix.
    """
    hist = np.asarray(hist, dtype=float)
    N = hist.sum()
    input_assert(N > 0, 'cannot estimate xi without snapshots')
    freq = hist / N
    binom = np.array([math.comb(2 * k - 1, i) for i in range(2 * k)],
                     dtype=float)
    se = np.sqrt(freq * (1.0 - freq) / N) / binom
    return float(np.linalg.norm(se) * math.sqrt(pascal_frobenius_squared(k)))


def moment_residual(d, g):
    """ ||w V(a) - g||_2 for the spikes d and raw moments g.
    """
    return float(np.linalg.norm(
        d.weights.dot(vandermonde(d.locations, len(g.values))) - g.values))


def refine_spikes(d, g, max_iter=50):
    """ Damped Gauss-Newton on the moment residual over locations and
        weights jointly, started at d. The refined distribution is returned
        only if it reduces the residual, keeps the weights nonnegative and
        the locations in [0, 1]; otherwise d is returned unchanged.
    """
    k = d.k
    b = len(g.values)
    powers = np.arange(b)
    params = np.concatenate([d.locations, d.weights])
    res0 = moment_residual(d, g)

    def residual(p):
        return p[k:].dot(vandermonde(p[:k], b)) - g.values

    r = residual(params)
    for _ in range(max_iter):
        norm = np.linalg.norm(r)
        if norm <= 1e-15:
            break
        a, w = params[:k], params[k:]
        J = np.empty((b, 2 * k))
        # d/da_j of w_j a_j^i is i w_j a_j^(i-1)
        J[:, :k] = (powers[:, None] * w[None, :] *
                    a[None, :] ** np.maximum(powers - 1, 0)[:, None])
        J[:, k:] = vandermonde(a, b).T
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        scale = 1.0
        while scale > 1e-6:
            trial = params + scale * step
            r_trial = residual(trial)
            if np.linalg.norm(r_trial) < norm:
                params, r = trial, r_trial
                break
            scale *= 0.5
        else:
            break

    a, w = params[:k], params[k:]
    if np.any(w < 0) or np.any(a < 0) or np.any(a > 1) or \
            not abs(w.sum() - 1.0) <= 1e-9:
        return d
    refined = KSpikeDistribution(w / w.sum(), a, tol=1e-9)
    if moment_residual(refined, g) >= res0:
        return d
    order = np.argsort(refined.locations)
    return KSpikeDistribution(refined.weights[order], refined.locations[order],
                              tol=1e-9)


def learn_kspike(bit_snapshots, cfg):
    """ Learn a k-spike distribution from (2k-1)-bit snapshots.
    """
    input_assert(len(bit_snapshots) > 0, 'no snapshots to learn from')
    return learn_kspike_from_nbm(empirical_nbm(bit_snapshots, cfg.k), cfg)


def learn_kspike_from_nbm(nu, cfg):
    """ The same pipeline from an NBM vector (empirical or exact).
    """
    input_assert(len(nu) == 2 * cfg.k,
                 'NBM vector has %d entries, k=%d needs %d' % (
                     len(nu), cfg.k, 2 * cfg.k))
    g = nbm_to_moments(nu)
    lam = solve_lambda(g, cfg.xi)
    alphas = polynomial_roots(lam, cfg.eps_root)
    theta = solve_weights(alphas, g)
    d = KSpikeDistribution(theta, alphas, tol=1e-9)
    if cfg.polish:
        d = refine_spikes(d, g)
    k = cfg.k
    log.debug('k-spike fit: locations %s weights %s, moment residual %.3e '
              '(fit bound excess %.3e)', d.locations.tolist(),
              d.weights.tolist(), moment_residual(d, g),
              (8 * k) ** 2.5 / cfg.tau * (2 * k * cfg.xi) ** (1.0 / k))
    return d


#------------------------- PRIVATE -------------------------

def _min_hankel_residual(A_eq, b_eq, k):
    """ min ||G x||_1 over x with x_k = 1, always attained.
    """
    c = np.concatenate([np.zeros(2 * k), np.ones(2 * k)])
    return solve_lp(c, A_eq=A_eq, b_eq=b_eq).value



def _newton_polish(z, lam, dlam):
    f = P.polyval(z, lam)
    for _ in range(NEWTON_MAX_ITER):
        df = P.polyval(z, dlam)
        if df == 0 or f == 0:
            break
        z_new = z - f / df
        f_new = P.polyval(z_new, lam)
        if not abs(f_new) < abs(f):
            break
        z, f = z_new, f_new
    return z


def _polish_on_support(y, Q, c, objective):
    """ Active-set refinement of y: solve the KKT system on the current
        support, dropping the most negative coordinate or adding the most
        violating one until the KKT conditions hold. The result is kept only
        if it is no worse than y.
    """
    k = len(y)
    support = set(np.nonzero(y > 1e-12)[0].tolist()) or set(range(k))
    best = y
    for _ in range(4 * k):
        S = sorted(support)
        s = len(S)
        K = np.zeros((s + 1, s + 1))
        K[:s, :s] = 2.0 * Q[np.ix_(S, S)]
        K[:s, s] = 1.0
        K[s, :s] = 1.0
        sol = np.linalg.lstsq(K, np.append(2.0 * c[S], 1.0), rcond=None)[0]
        ys, nu = sol[:s], sol[s]
        if np.any(ys < 0):
            if s == 1:
                break
            support.discard(S[int(np.argmin(ys))])
            continue
        candidate = np.zeros(k)
        candidate[S] = ys
        # Outside the support the gradient plus multiplier must be >= 0
        slack = 2.0 * (Q.dot(candidate) - c) + nu
        outside = [i for i in range(k) if i not in support]
        violating = [i for i in outside if slack[i] < -1e-12]
        if not violating:
            if objective(candidate) <= objective(best):
                best = candidate
            break
        support.add(min(violating, key=lambda i: slack[i]))
    return best
