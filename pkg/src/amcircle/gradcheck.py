"""Central finite differences for checking analytic gradients."""

import numpy as np


def central_difference(f, x, h=1e-5):
    """Gradient of scalar ``f`` at ``x`` by ``(f(x + h e_i) - f(x - h e_i)) / 2h``."""
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        up = f(x)
        flat[i] = old - h
        down = f(x)
        flat[i] = old
        g[i] = (up - down) / (2 * h)
    return grad


def gradients_agree(analytic, numeric, rtol=1e-6, atol=1e-8):
    """Elementwise: relative error within ``rtol`` or absolute within ``atol``."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    err = np.abs(a - n)
    scale = np.maximum(np.abs(a), np.abs(n))
    return (err <= rtol * scale) | (err <= atol)
