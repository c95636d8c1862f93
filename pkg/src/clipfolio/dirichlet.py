"""Dirichlet log-density, entropy and their concentration gradients (row-wise)."""

import numpy as np
from scipy.special import digamma, gammaln, polygamma


def logpdf(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    a0 = alpha.sum(axis=-1)
    return gammaln(a0) - gammaln(alpha).sum(axis=-1) + ((alpha - 1.0) * np.log(x)).sum(axis=-1)


def logpdf_grad_alpha(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    a0 = alpha.sum(axis=-1, keepdims=True)
    return digamma(a0) - digamma(alpha) + np.log(x)


def entropy(alpha: np.ndarray) -> np.ndarray:
    k = alpha.shape[-1]
    a0 = alpha.sum(axis=-1)
    log_b = gammaln(alpha).sum(axis=-1) - gammaln(a0)
    return log_b + (a0 - k) * digamma(a0) - ((alpha - 1.0) * digamma(alpha)).sum(axis=-1)


def entropy_grad_alpha(alpha: np.ndarray) -> np.ndarray:
    k = alpha.shape[-1]
    a0 = alpha.sum(axis=-1, keepdims=True)
    return (a0 - k) * polygamma(1, a0) - (alpha - 1.0) * polygamma(1, alpha)


def mean(alpha: np.ndarray) -> np.ndarray:
    return alpha / alpha.sum(axis=-1, keepdims=True)
