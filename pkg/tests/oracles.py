"""Independent reference computations used to pin expected test values.

Everything here deliberately takes a different route from the library:
high-precision unshifted sums, dense matrix assembly, per-coordinate
finite differences, explicit loops.  Tests compare library output against
these, never against the library itself.
"""

import mpmath
import numpy as np

from sebsolve import Instance


def make_instance(rng, m, n, center_scale=10.0, radius_scale=5.0):
    centers = rng.uniform(-center_scale, center_scale, (m, n))
    radii = rng.uniform(0.0, radius_scale, m)
    return Instance(centers, radii)


def per_ball(instance, x, mu):
    """Per-ball differences, smoothed distances, and values via plain loops."""
    x = np.asarray(x, dtype=float)
    diff = np.empty((instance.m, instance.n))
    smooth_dist = np.empty(instance.m)
    for i in range(instance.m):
        diff[i] = x - instance.centers[i]
        smooth_dist[i] = np.sqrt(float(diff[i] @ diff[i]) + mu * mu)
    values = smooth_dist + instance.radii
    return diff, smooth_dist, values


def softmax_ref(values, mu):
    """Shifted softmax written independently of the library."""
    z = (np.asarray(values) - np.max(values)) / mu
    w = np.exp(z)
    return w / np.sum(w)


def smoothed_objective_mp(instance, x, mu, dps=50):
    """Unshifted log-sum-exp evaluated in high-precision arithmetic."""
    with mpmath.workdps(dps):
        mu_mp = mpmath.mpf(float(mu))
        terms = []
        for i in range(instance.m):
            sq = mpmath.fsum(
                (mpmath.mpf(float(x[j])) - mpmath.mpf(float(instance.centers[i, j]))) ** 2
                for j in range(instance.n)
            )
            value = mpmath.sqrt(sq + mu_mp * mu_mp) + mpmath.mpf(float(instance.radii[i]))
            terms.append(mpmath.exp(value / mu_mp))
        return float(mu_mp * mpmath.log(mpmath.fsum(terms)))


def weights_mp(instance, x, mu, dps=50):
    """Softmax weights from the unshifted definition in high precision."""
    with mpmath.workdps(dps):
        mu_mp = mpmath.mpf(float(mu))
        terms = []
        for i in range(instance.m):
            sq = mpmath.fsum(
                (mpmath.mpf(float(x[j])) - mpmath.mpf(float(instance.centers[i, j]))) ** 2
                for j in range(instance.n)
            )
            value = mpmath.sqrt(sq + mu_mp * mu_mp) + mpmath.mpf(float(instance.radii[i]))
            terms.append(mpmath.exp(value / mu_mp))
        total = mpmath.fsum(terms)
        return np.array([float(t / total) for t in terms])


def fd_gradient(func, x, step):
    """Central finite differences, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        grad[j] = (func(x + e) - func(x - e)) / (2.0 * step)
    return grad


def dense_hessian(instance, x, mu):
    """Full-sum Hessian assembled entry by entry; returns (H, gradient)."""
    diff, smooth_dist, values = per_ball(instance, x, mu)
    lam = softmax_ref(values, mu)
    n = instance.n
    eye = np.eye(n)
    grad = np.zeros(n)
    H = np.zeros((n, n))
    for i in range(instance.m):
        g = smooth_dist[i]
        u = diff[i] / g
        grad += lam[i] * u
        H += lam[i] * (eye / g - np.outer(diff[i], diff[i]) / g**3)
        H += (lam[i] / mu) * np.outer(u, u)
    H -= np.outer(grad, grad) / mu
    return H, grad


def dense_truncated_hessian(instance, x, mu, indices):
    """Truncated-sum Hessian over the given ball subset; returns (H, gradient).

    The renormalized weights are recomputed here from the definition.
    """
    diff, smooth_dist, values = per_ball(instance, x, mu)
    z = (values - np.max(values)) / mu
    w = np.exp(z)
    w_sel = w[indices]
    lam_t = w_sel / np.sum(w_sel)
    n = instance.n
    eye = np.eye(n)
    grad = np.zeros(n)
    H = np.zeros((n, n))
    for k, i in enumerate(indices):
        g = smooth_dist[i]
        u = diff[i] / g
        grad += lam_t[k] * u
        H += lam_t[k] * (eye / g - np.outer(diff[i], diff[i]) / g**3)
        H += (lam_t[k] / mu) * np.outer(u, u)
    H -= np.outer(grad, grad) / mu
    return H, grad


def dense_inverse_bfgs(pairs, n):
    """Inverse-Hessian approximation built explicitly from update formulas.

    Applies the standard rank-two inverse update for each stored (s, y)
    pair in order, starting from s.y/y.y times the identity for the newest
    pair (the same scaling the two-loop recursion uses).
    """
    pairs = list(pairs)
    if not pairs:
        return np.eye(n)
    s_new, y_new, _ = pairs[-1]
    gamma = float(s_new @ y_new) / float(y_new @ y_new)
    H = gamma * np.eye(n)
    for s, y, rho in pairs:
        V = np.eye(n) - rho * np.outer(y, s)
        H = V.T @ H @ V + rho * np.outer(s, s)
    return H


def two_ball_center_bisection(c1, r1, c2, r2, tol=1e-13):
    """Minimizer of the two-ball max function, restricted to the center line.

    Bisects for the balance point where both distance-plus-radius values
    agree (clamped to the segment endpoints when one ball dominates).
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    length = float(np.linalg.norm(c2 - c1))

    def phi(t):
        return (t * length + r1) - ((1.0 - t) * length + r2)

    if phi(0.0) >= 0.0:
        t = 0.0
    elif phi(1.0) <= 0.0:
        t = 1.0
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if phi(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
    return c1 + t * (c2 - c1)
