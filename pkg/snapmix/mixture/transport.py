#-------------------------------------------------------------------------------
# snapmix: mixture/transport.py
#
# Transportation distance between weighted point sets, for mixtures (total
# variation ground cost) and for k-spike distributions (absolute difference).
#-------------------------------------------------------------------------------
from collections import namedtuple

import numpy as np

from ..common.lp import solve_lp
from ..common.utils import input_assert

# Tolerance on the normalization of the two marginals
MARGINAL_TOL = 1e-9

# cost: optimal transportation cost
# flow: k x l matrix; flow[i, j] is the mass moved from point i to point j
TransportPlan = namedtuple('TransportPlan', 'cost flow')


def transport_distance(wA, wB, cost):
    """ Solve the transportation LP between marginals wA (length k) and wB
        (length l) under the k x l ground cost matrix.
    """
    wA = np.asarray(wA, dtype=float).ravel()
    wB = np.asarray(wB, dtype=float).ravel()
    cost = np.atleast_2d(np.asarray(cost, dtype=float))
    k, l = len(wA), len(wB)
    input_assert(cost.shape == (k, l),
                 'cost matrix of shape %r for marginals of length %d and %d' % (
                     cost.shape, k, l))
    for w in (wA, wB):
        input_assert(np.all(w >= -MARGINAL_TOL) and
                     abs(w.sum() - 1.0) <= MARGINAL_TOL,
                     'transport marginals must be normalized (sum %r)' % w.sum())
    input_assert(np.all(cost >= 0), 'ground costs must be nonnegative')
    wA = np.maximum(wA, 0.0)
    wB = np.maximum(wB, 0.0)

    # A single point on either side leaves one feasible flow
    if k == 1 or l == 1:
        flow = np.outer(wA, wB)
        return TransportPlan(cost=float((flow * cost).sum()), flow=flow)

    # Variables are flow[i, j] in row-major order
    A_eq = np.zeros((k + l, k * l))
    for i in range(k):
        A_eq[i, i * l:(i + 1) * l] = 1.0
    for j in range(l):
        A_eq[k + j, j::l] = 1.0
    b_eq = np.concatenate([wA, wB / wB.sum() * wA.sum()])
    res = solve_lp(cost.ravel(), A_eq=A_eq, b_eq=b_eq)
    flow = res.x.reshape(k, l)
    return TransportPlan(cost=float((flow * cost).sum()), flow=flow)


def mixture_transport(src1, src2):
    """ Transportation distance between two mixture sources on the same
        domain, with ground cost the total variation of constituents.
    """
    input_assert(src1.n == src2.n,
                 'mixtures over different domains (%d vs %d items)' % (
                     src1.n, src2.n))
    P, Q = src1.constituents, src2.constituents
    cost = 0.5 * np.abs(P[:, None, :] - Q[None, :, :]).sum(axis=2)
    return transport_distance(src1.weights, src2.weights, cost)


def spike_transport(d1, d2):
    """ Transportation distance between two k-spike distributions.
    """
    cost = np.abs(d1.locations[:, None] - d2.locations[None, :])
    return transport_distance(d1.weights, d2.weights, cost)
