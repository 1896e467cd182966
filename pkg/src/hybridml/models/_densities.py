import math

import numpy as np
from scipy.special import gammaln

LOG_2PI = math.log(2 * math.pi)


def log_normal(x, mean, var):
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def log_inverse_gamma(x, shape, rate):
    return shape * math.log(rate) - gammaln(shape) - (shape + 1) * np.log(x) - rate / x
