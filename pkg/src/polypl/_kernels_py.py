"""Reference (uncompiled) monomial-sum kernels.

A kernel evaluates ``rows[i] = sum_{t: owner[t] == i} coef[t] * exp(exps[t] . u)``
where ``u = log(x)``; each term is one poly-PL monomial.
"""

import numpy as np


def rates(coef, exps, owner, nrows, u):
    mono = coef * np.exp(exps @ u)
    return np.bincount(owner, weights=mono, minlength=nrows)


def rates_and_dlog(coef, exps, owner, nrows, u):
    mono = coef * np.exp(exps @ u)
    out = np.bincount(owner, weights=mono, minlength=nrows)
    jac = np.zeros((nrows, exps.shape[1]))
    np.add.at(jac, owner, mono[:, None] * exps)
    return out, jac
