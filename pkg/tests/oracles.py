"""Independent reference implementations used to check the package.

Everything here recomputes results from first principles (grid scans, brute
force, direct accumulation) without calling the code paths under test.
"""

import math

import numpy as np


def tox_curve(a, d):
    return ((math.tanh(d) + 1.0) / 2.0) ** a


def invert_by_grid(p_target, d, lo, hi, step=1e-6):
    """Brute-force minimiser of |toxicity(a) - p_target| over [lo, hi]."""
    a = np.arange(lo, hi + step / 2, step)
    b = (math.tanh(d) + 1.0) / 2.0
    return float(a[int(np.argmin(np.abs(b ** a - p_target)))])


def klucb_by_grid(q_hat, n, t, step=1e-6):
    """Largest q on a grid with n * kl(q_hat, q) <= log(t)."""
    qs = np.arange(q_hat, 1.0 - 1e-12, step)
    if len(qs) == 0:
        return 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        kl = np.zeros_like(qs)
        if q_hat > 0:
            kl += q_hat * np.log(q_hat / qs)
        if q_hat < 1:
            kl += (1 - q_hat) * np.log((1 - q_hat) / (1 - qs))
    ok = qs[kl <= math.log(t) / n]
    return float(ok[-1]) if len(ok) else float(q_hat)


def posterior_stats_fine(labels, prior_rate, tox_counts, n_counts,
                         lo=0.1, hi=10.0, step=1e-4):
    """Posterior mean and band masses by direct integration on a fine grid."""
    a = np.arange(lo, hi + step / 2, step)
    log_dens = -prior_rate * a
    for d, s, n in zip(labels, tox_counts, n_counts):
        b = (math.tanh(d) + 1.0) / 2.0
        logp = a * math.log(b)
        log_dens = log_dens + s * logp + (n - s) * np.log1p(-np.exp(logp))
    dens = np.exp(log_dens - log_dens.max())
    z = np.trapezoid(dens, a)
    mean = float(np.trapezoid(a * dens, a) / z)
    return a, dens / z, mean


def _log_posterior_density(a, labels, prior_rate, tox_counts, n_counts):
    log_dens = -prior_rate * a
    for d, s, n in zip(labels, tox_counts, n_counts):
        b = (math.tanh(d) + 1.0) / 2.0
        logp = a * math.log(b)
        log_dens = log_dens + s * logp + (n - s) * np.log1p(-np.exp(logp))
    return log_dens


def band_mass_fine(labels, prior_rate, tox_counts, n_counts, lower, upper,
                   dose_index0, lo=0.1, hi=10.0, points=200_001):
    """Posterior probability that one dose's toxicity lies in (lower, upper].

    The band is the exact parameter interval where the dose's toxicity falls
    inside it; the density is integrated on dedicated fine grids over that
    interval and over the whole domain.
    """
    b = (math.tanh(labels[dose_index0]) + 1.0) / 2.0
    a_start = lo if upper >= 1.0 else math.log(upper) / math.log(b)
    a_end = hi if lower <= 0.0 else math.log(lower) / math.log(b)
    a_start = min(max(a_start, lo), hi)
    a_end = min(max(a_end, lo), hi)
    full = np.linspace(lo, hi, points)
    log_full = _log_posterior_density(full, labels, prior_rate, tox_counts, n_counts)
    shift = log_full.max()
    z = np.trapezoid(np.exp(log_full - shift), full)
    if a_end <= a_start:
        return 0.0
    seg = np.linspace(a_start, a_end, points)
    log_seg = _log_posterior_density(seg, labels, prior_rate, tox_counts, n_counts)
    return float(np.trapezoid(np.exp(log_seg - shift), seg) / z)


def pareto_by_double_loop(p_tilde, q_tilde):
    """O(K^2) dominance scan; a dose is kept unless some other dose is at
    least as safe and at least as effective with one strict improvement."""
    k = len(p_tilde)
    keep = []
    for i in range(k):
        dominated = any(
            p_tilde[j] <= p_tilde[i] and q_tilde[j] >= q_tilde[i]
            and (p_tilde[j] < p_tilde[i] or q_tilde[j] > q_tilde[i])
            for j in range(k) if j != i)
        if not dominated:
            keep.append(i + 1)
    return tuple(keep)


def regret_by_accumulation(doses_1based, true_eff, q_star):
    """Spreadsheet-style running pseudo-regret."""
    out = []
    total = 0.0
    for t, dk in enumerate(doses_1based, start=1):
        total += true_eff[dk - 1]
        out.append(q_star * t - total)
    return out


def violations_by_accumulation(doses_1based, true_tox, theta):
    out = []
    total = 0.0
    for t, dk in enumerate(doses_1based, start=1):
        total += true_tox[dk - 1]
        out.append(total / t > theta)
    return out


def seeda_choice_by_enumeration(n_per_dose, eff_successes, tox_events, t,
                                labels, theta, c, delta, c1_bar, gamma1_bar,
                                est_lo, est_hi):
    """Re-derive one safe-exploration selection step from scratch."""
    k = len(labels)
    bases = np.array([(math.tanh(d) + 1.0) / 2.0 for d in labels])
    a_hats = []
    for i in range(k):
        p_hat = tox_events[i] / n_per_dose[i]
        if p_hat <= 0:
            a_hats.append(est_hi)
        elif p_hat >= 1:
            a_hats.append(est_lo)
        else:
            a_hats.append(min(max(math.log(p_hat) / math.log(bases[i]), est_lo), est_hi))
    weights = np.asarray(n_per_dose) / t
    a_hat = float(weights @ np.asarray(a_hats))
    alpha = c1_bar * k * (math.log(2 * k / delta) / (2 * t)) ** (gamma1_bar / 2.0)
    admissible = [i for i in range(k) if bases[i] ** (a_hat + alpha) <= theta]
    values = [eff_successes[i] / n_per_dose[i]
              + math.sqrt(c * math.log(t) / n_per_dose[i]) for i in range(k)]
    if not admissible:
        return 1, a_hat, alpha, ()
    best = max(admissible, key=lambda i: (values[i], -i))
    # ties resolve to the lowest dose
    for i in admissible:
        if values[i] == values[best]:
            best = i
            break
    return best + 1, a_hat, alpha, tuple(i + 1 for i in admissible)
