"""Independent 50-digit evaluation of the closed-form bound formulas.

Written straight from the formulas with mpmath, sharing no code with the
package, so agreement to 10 significant digits checks both.
"""

import mpmath as mp

mp.mp.dps = 50


def _vec(v):
    return [mp.mpf(float(x)) for x in v]


def _dot(a, b):
    return mp.fsum(x * y for x, y in zip(a, b))


def _quad(v, M):
    return mp.fsum(v[i] * M[i][j] * v[j] for i in range(len(v)) for j in range(len(v)))


def prior_z(diff, mean, cov):
    return _dot(diff, mean) / mp.sqrt(_quad(diff, cov))


def two_action_n0(a0, a1, mean, cov, theta0, beta, eps):
    a0, a1, mean, theta0 = _vec(a0), _vec(a1), _vec(mean), _vec(theta0)
    cov = [_vec(r) for r in cov]
    beta, eps = mp.mpf(beta), mp.mpf(eps)
    diff = [x - y for x, y in zip(a0, a1)]
    x = prior_z(diff, mean, cov)
    return mp.log((1 / eps - 1) * (1 / mp.ncdf(x) - 1)) / (beta * _dot(diff, theta0))


def theorem1_n0(actions, mean, cov, theta0, beta, eps, mu_min):
    acts = [_vec(a) for a in actions]
    mean, theta0 = _vec(mean), _vec(theta0)
    cov = [_vec(r) for r in cov]
    beta, eps, mu_min = mp.mpf(beta), mp.mpf(eps), mp.mpf(mu_min)
    K = len(acts)
    ks = []
    for i in range(K):
        for j in range(K):
            diff = [x - y for x, y in zip(acts[i], acts[j])]
            gap = _dot(diff, theta0)
            if gap > 0:
                x = prior_z(diff, mean, cov)
                ks.append(mp.log((2 * K**2 / eps - 1) * (1 / mp.ncdf(x) - 1)) / (beta * gap))
    k_max = max(max(ks), mp.mpf(1))
    n0 = (mp.log(K) + (k_max - 1) * mp.log(mp.log(K))) / (mu_min**2 * eps)
    return n0, k_max


def bound_constants(N, K, T, beta, lam, d, mu_min):
    beta, lam, mu_min = mp.mpf(beta), mp.mpf(lam), mp.mpf(mu_min)
    delta = mp.log(T * beta) / beta
    m = min(mp.mpf(1), delta)
    a1 = K * m
    a2 = mp.sqrt(2 * mp.log(2 * mp.sqrt(d) * T)) / lam
    f1t = (1 - 1 / (1 + mp.exp(beta * (m + a2 - a1)))) ** N + (1 - mu_min) ** (2 * N)
    f1 = f1t + mp.mpf(1) / T
    f2 = min(a1**2 + mp.mpf(N * K) / (T * beta) / (1 + mp.exp(-beta * a2 + a1)) + mp.mpf(2) / T, mp.mpf(K))
    app = min(
        K * min(mp.mpf(1), delta**2 / 2)
        + mp.mpf(N * K) / (T * beta) / (1 + mp.exp(-beta * a2 + (K - 1) * m))
        + mp.mpf(1) / T,
        mp.mpf(K),
    )
    return {"delta": delta, "alpha1": a1, "alpha2": a2, "f1_tilde": f1t, "f1": f1, "f2": f2,
            "appendix_variant_f2": app}


def general_ps_bound(E, eps, K, T, C1):
    E, eps, C1 = mp.mpf(E), mp.mpf(eps), mp.mpf(C1)
    return mp.sqrt(T * E * mp.log(E) + eps * mp.log(K / eps)) + C1 * T * eps


def warmpref_bound(f1_tilde, f1, f2, K, T):
    inner = max(mp.log(f2) + f1 * mp.log(K / f1), mp.mpf(0))
    return mp.sqrt(T * f2 * inner) + 2 * mp.sqrt(2 * mp.log(K)) * T * (f1_tilde + mp.mpf(1) / T)
