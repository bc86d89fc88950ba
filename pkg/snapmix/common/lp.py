#-------------------------------------------------------------------------------
# snapmix: common/lp.py
#
# Dense two-phase simplex for the small linear programs of the library
# (transportation problems, the annihilating-polynomial LP, l1 projections
# onto the simplex and the moment-matching LP of the lower bounds).
#-------------------------------------------------------------------------------
from collections import namedtuple
import logging

import numpy as np

from .exceptions import LPError, LPInfeasibleError, LPUnboundedError
from .utils import input_assert

log = logging.getLogger(__name__)

# x: optimal primal solution
# value: optimal objective value c.x
# basis: indices (into the standard-form columns) of the final basic variables
# iterations: number of pivots over both phases
LPResult = namedtuple('LPResult', 'x value basis iterations')


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol=1e-11,
             max_iter=None):
    """ Minimize c.x subject to A_ub x <= b_ub, A_eq x = b_eq and x >= 0.

        Free variables must be split by the caller. Pivoting follows Bland's
        rule, so the returned vertex is a deterministic function of the input.
        Raises LPInfeasibleError or LPUnboundedError.
    """
    return DenseSimplex(c, A_ub, b_ub, A_eq, b_eq, tol=tol,
                        max_iter=max_iter).solve()


class DenseSimplex(object):
    """ Tableau simplex on the standard form [A_ub I; A_eq 0] [x; s] = b.

        c, A_ub, b_ub, A_eq, b_eq:
            Problem data; either inequality or equality block may be None.

        tol:
            Pivot and optimality tolerance.
    """
    def __init__(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                 tol=1e-11, max_iter=None):
        self.c = np.asarray(c, dtype=float).ravel()
        self.nvars = len(self.c)
        A_ub, b_ub = self._block(A_ub, b_ub)
        A_eq, b_eq = self._block(A_eq, b_eq)
        self.n_ub = A_ub.shape[0]
        self.n_eq = A_eq.shape[0]
        self.tol = tol

        m = self.n_ub + self.n_eq
        input_assert(m > 0, 'LP has no constraints')
        # Standard form: original variables, then one slack per inequality
        self.ncols = self.nvars + self.n_ub
        A = np.zeros((m, self.ncols))
        A[:self.n_ub, :self.nvars] = A_ub
        A[:self.n_ub, self.nvars:] = np.eye(self.n_ub)
        A[self.n_ub:, :self.nvars] = A_eq
        b = np.concatenate([b_ub, b_eq])
        self.A = A
        self.b = b
        self.max_iter = max_iter or 50 * (m + self.ncols) + 100
        self.iterations = 0

    def solve(self):
        m = self.A.shape[0]
        A = self.A.copy()
        b = self.b.copy()
        flipped = b < 0
        A[flipped] *= -1
        b[flipped] *= -1

        # Slacks of unflipped inequality rows start in the basis; every other
        # row gets an artificial column.
        art_rows = [i for i in range(m) if i >= self.n_ub or flipped[i]]
        nart = len(art_rows)
        T = np.zeros((m + 1, self.ncols + nart + 1))
        T[:m, :self.ncols] = A
        T[:m, -1] = b
        basis = []
        for i in range(m):
            if i in art_rows:
                a = art_rows.index(i)
                T[i, self.ncols + a] = 1.0
                basis.append(self.ncols + a)
            else:
                basis.append(self.nvars + i)
        self._kept_rows = list(range(m))

        # Phase 1: minimize the sum of artificials
        if nart:
            for i in art_rows:
                T[m, :] -= T[i, :]
            T[m, self.ncols:self.ncols + nart] = 0.0
            self._run(T, basis, allowed=self.ncols + nart)
            infeasibility = -T[m, -1]
            scale = 1.0 + np.abs(b).max()
            if infeasibility > 1e-9 * scale:
                raise LPInfeasibleError(
                    'LP infeasible (phase 1 residual %.3e)' % infeasibility)
            T, basis = self._drive_out_artificials(T, basis, nart)
        else:
            T = np.delete(T, np.s_[self.ncols:self.ncols + nart], axis=1)

        # Phase 2 objective row: reduced costs c - c_B B^-1 A
        mrows = T.shape[0] - 1
        T[mrows, :] = 0.0
        T[mrows, :self.ncols] = self._std_cost()
        for i, j in enumerate(basis):
            cj = T[mrows, j]
            if cj != 0.0:
                T[mrows, :] -= cj * T[i, :]
        self._run(T, basis, allowed=self.ncols)

        x = self._refined_solution(T, basis)
        value = float(self.c.dot(x[:self.nvars]))
        log.debug('LP solved: %d rows, %d columns, %d pivots, value %.12g',
                  m, self.ncols, self.iterations, value)
        return LPResult(x=x[:self.nvars], value=value, basis=tuple(basis),
                        iterations=self.iterations)

    #------ PRIVATE ------#
    def _block(self, A, b):
        if A is None:
            return np.zeros((0, self.nvars)), np.zeros(0)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        input_assert(A.shape == (len(b), self.nvars),
                     'constraint block of shape %r does not match %d rows x %d '
                     'variables' % (A.shape, len(b), self.nvars))
        return A, b

    def _std_cost(self):
        cost = np.zeros(self.ncols)
        cost[:self.nvars] = self.c
        return cost

    def _run(self, T, basis, allowed):
        """ Pivot until no column among the first 'allowed' ones has a
            negative reduced cost.
        """
        m = T.shape[0] - 1
        while True:
            if self.iterations >= self.max_iter:
                raise LPError('simplex did not terminate in %d pivots' %
                              self.max_iter)
            reduced = T[m, :allowed]
            candidates = np.nonzero(reduced < -self.tol)[0]
            if len(candidates) == 0:
                return
            col = candidates[0]
            row = self._leaving_row(T, basis, col)
            if row is None:
                raise LPUnboundedError('LP unbounded along column %d' % col)
            self._pivot(T, basis, row, col)

    def _leaving_row(self, T, basis, col):
        m = T.shape[0] - 1
        column = T[:m, col]
        rows = np.nonzero(column > self.tol)[0]
        if len(rows) == 0:
            return None
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + self.tol * max(1.0, abs(best))]
        # Bland: among ties leave the variable with the smallest index
        return min(ties, key=lambda i: basis[i])

    def _pivot(self, T, basis, row, col):
        T[row, :] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])
        basis[row] = col
        self.iterations += 1

    def _drive_out_artificials(self, T, basis, nart):
        """ Pivot artificial variables out of the basis, deleting rows that
            turn out to be redundant, and drop the artificial columns.
        """
        m = T.shape[0] - 1
        keep = []
        for i in range(m):
            if basis[i] < self.ncols:
                keep.append(i)
                continue
            row = T[i, :self.ncols]
            nz = np.nonzero(np.abs(row) > self.tol)[0]
            if len(nz):
                self._pivot(T, basis, i, nz[0])
                keep.append(i)
            else:
                log.debug('LP: dropping redundant constraint row %d', i)
        self._kept_rows = keep
        T = T[keep + [m], :]
        T = np.delete(T, np.s_[self.ncols:self.ncols + nart], axis=1)
        basis = [basis[i] for i in keep]
        return T, basis

    def _refined_solution(self, T, basis):
        """ Recompute the basic solution from the original data, which removes
            error accumulated over the pivots.
        """
        x = np.zeros(self.ncols)
        rows = self._kept_rows
        B = self.A[rows][:, basis]
        try:
            xb = np.linalg.solve(B, self.b[rows])
        except np.linalg.LinAlgError:
            xb = T[:len(basis), -1]
        if np.any(xb < -1e-9 * (1.0 + np.abs(xb).max())):
            xb = T[:len(basis), -1]
        x[basis] = np.maximum(xb, 0.0)
        return x
