"""Pure-numpy implementations of the hot kernels.

Mirrors the compiled extension ``polyax._kernels`` function for function;
``polyax.backend`` picks whichever is available (or whatever ``PAX_BACKEND``
forces).  Semantics must stay identical between the two, tests compare them
point for point.
"""

import numpy as np

NAME = "numpy"

_MAX_TERMS = 400
_TERM_FLOOR = 1e-20


def bessel_series(nu, x):
    """Power series for the normalized Bessel function at small argument.

    Sums Gamma(nu+1) * sum_k (-1)^k / (k! Gamma(nu+k+1)) (x/2)^(2k), written
    with the ratio recurrence t_{k+1} = -t_k * (x/2)^2 / ((k+1)(nu+k+1)) so no
    Gamma evaluation is needed.  Kahan-compensated; the caller is responsible
    for keeping x inside the cancellation-safe region.
    """
    x = np.asarray(x, dtype=np.float64)
    q = 0.25 * x * x
    s = np.ones_like(q)
    comp = np.zeros_like(q)
    t = np.ones_like(q)
    for k in range(1, _MAX_TERMS):
        t = t * (-q / (k * (nu + k)))
        y = t - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        if np.max(np.abs(t)) < _TERM_FLOOR:
            break
    return s


def cubic_interp_even(values, dx, xmax, q):
    """Cubic interpolation on a uniform grid with even reflection at 0.

    ``values[i]`` samples f at i*dx for i = 0..len(values)-1, the last node
    sitting at ``xmax``.  Queries beyond ``xmax`` return 0 (zero extension);
    queries must be >= 0.  Four-point Lagrange, stencil reflected across the
    origin (f is even) and shifted at the top end.
    """
    values = np.asarray(values, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    n = values.shape[0]
    out = np.zeros(q.shape, dtype=np.float64)
    inside = q <= xmax
    if not np.any(inside):
        return out
    s = q[inside] / dx
    i = np.floor(s).astype(np.intp)
    i = np.minimum(i, n - 3)  # shift stencil down near the top node
    r = s - i
    # Lagrange weights on the uniform stencil {-1, 0, 1, 2} evaluated at r.
    w0 = -r * (r - 1.0) * (r - 2.0) / 6.0
    w1 = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0
    w2 = -(r + 1.0) * r * (r - 2.0) / 2.0
    w3 = (r + 1.0) * r * (r - 1.0) / 6.0
    i0 = np.abs(i - 1)  # even reflection: node -1 reuses node +1
    acc = w0 * values[i0] + w1 * values[i] + w2 * values[i + 1] + w3 * values[i + 2]
    out[inside] = acc
    return out


def translate_gather(values, dx, xmax, x, y, u, w):
    """Weighted angular average f(sqrt(x^2 + y_j^2 - 2 x y_j u_k)).

    ``values/dx/xmax`` describe the uniform sample of f as in
    ``cubic_interp_even``; ``u``/``w`` are the cos(theta) nodes and weights.
    Returns out[j] = sum_k w[k] * f(X(x, y_j, u_k)).
    """
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    arg = x * x + y[:, None] * y[:, None] - 2.0 * x * y[:, None] * u[None, :]
    np.maximum(arg, 0.0, out=arg)
    bigx = np.sqrt(arg)
    vals = cubic_interp_even(values, dx, xmax, bigx.ravel()).reshape(bigx.shape)
    return vals @ w
