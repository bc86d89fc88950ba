import itertools
import os, sys, subprocess

import numpy as np


def run_exe(exe_path, args=[], echo=False):
    """ Runs the given executable as a subprocess, given the
        list of arguments. Captures its return code (rc) and stdout and
        returns a pair: rc, stdout_str
    """
    popen_cmd = [exe_path] + args
    if os.path.splitext(exe_path)[1] == '.py':
        popen_cmd.insert(0, sys.executable)
    if echo:
      print('[cmd]', ' '.join(popen_cmd))
    proc = subprocess.Popen(popen_cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    proc_stdout = proc.communicate()[0]
    return proc.returncode, proc_stdout.decode('latin-1')


def is_in_rootdir():
    """ Check whether the current dir is the root dir of snapmix
    """
    return os.path.isdir('test') and os.path.isdir('snapmix')


def slow_tests_enabled():
    """ Long Monte-Carlo experiments run only with SNAPMIX_SLOW_TESTS=1
    """
    return os.environ.get('SNAPMIX_SLOW_TESTS') == '1'


#----------------------------- Brute-force oracles -----------------------------

def lp_vertex_oracle(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
    """ Optimal value of min c.x, A_ub x <= b_ub, A_eq x = b_eq, x >= 0 by
        enumerating every basic solution of the standard form. Returns None
        if no basic solution is feasible. Only for tiny problems.
    """
    c = np.asarray(c, dtype=float)
    nvars = len(c)
    blocks, rhs = [], []
    n_ub = 0
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        n_ub = A_ub.shape[0]
        blocks.append(np.hstack([A_ub, np.eye(n_ub)]))
        rhs.append(np.asarray(b_ub, dtype=float))
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        blocks.append(np.hstack([A_eq, np.zeros((A_eq.shape[0], n_ub))]))
        rhs.append(np.asarray(b_eq, dtype=float))
    A = np.vstack(blocks)
    b = np.concatenate(rhs)
    cost = np.concatenate([c, np.zeros(n_ub)])
    # Redundant rows would make every basis singular
    rank = np.linalg.matrix_rank(A)
    if rank < A.shape[0]:
        rows = []
        for i in range(A.shape[0]):
            if np.linalg.matrix_rank(A[rows + [i]]) > len(rows):
                rows.append(i)
        A, b = A[rows], b[rows]
    m, ncols = A.shape
    best = None
    for cols in itertools.combinations(range(ncols), m):
        B = A[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if np.any(xb < -1e-9):
            continue
        value = cost[list(cols)].dot(xb)
        if best is None or value < best:
            best = value
    return best


def spike_transport_oracle(w1, a1, w2, a2):
    """ Earth mover distance on the line: the integral of |F1 - F2|.
    """
    points = np.union1d(a1, a2)
    F1 = np.array([np.sum(np.asarray(w1)[np.asarray(a1) <= p]) for p in points])
    F2 = np.array([np.sum(np.asarray(w2)[np.asarray(a2) <= p]) for p in points])
    return float(np.sum(np.abs(F1 - F2)[:-1] * np.diff(points)))


def simplex_ls_oracle(V, g):
    """ Minimum of ||y V - g||^2 over the simplex by enumerating supports
        and solving the equality-constrained problem on each.
    """
    k = V.shape[0]
    best = np.inf
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            S = list(S)
            VS = V[S]
            K = np.zeros((size + 1, size + 1))
            K[:size, :size] = 2 * VS.dot(VS.T)
            K[:size, size] = 1.0
            K[size, :size] = 1.0
            rhs = np.append(2 * VS.dot(g), 1.0)
            y = np.linalg.lstsq(K, rhs, rcond=None)[0][:size]
            if np.any(y < -1e-12):
                continue
            r = y.dot(VS) - g
            best = min(best, r.dot(r))
    return best


def l1_simplex_cost(phat):
    """ min over the simplex of ||x - phat||_1, in closed form.
    """
    phat = np.asarray(phat, dtype=float)
    return float(-phat[phat < 0].sum() + abs(1.0 - phat[phat > 0].sum()))


def enumerate_snapshot_tv(w1, a1, w2, a2, b):
    """ 1/2 sum over {0,1}^b of the difference of snapshot probabilities,
        one bit string at a time.
    """
    total = 0.0
    for bits in itertools.product((0, 1), repeat=b):
        ones = sum(bits)
        p1 = sum(w * a ** ones * (1 - a) ** (b - ones) for w, a in zip(w1, a1))
        p2 = sum(w * a ** ones * (1 - a) ** (b - ones) for w, a in zip(w2, a2))
        total += abs(p1 - p2)
    return 0.5 * total
