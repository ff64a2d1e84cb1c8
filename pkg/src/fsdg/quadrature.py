"""1D quadrature rules and nodal Lagrange bases on the unit interval."""

import numpy as np
from scipy import special


def gauss_legendre(n):
    """Gauss-Legendre rule with n points, mapped to [0, 1]."""
    x, w = special.roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_lobatto(n):
    """Gauss-Lobatto nodes (n >= 2) on [0, 1]; endpoints included."""
    if n < 2:
        raise ValueError("Lobatto grid needs at least 2 points")
    if n == 2:
        nodes = np.array([-1.0, 1.0])
    else:
        # interior nodes are the roots of P'_{n-1}
        c = np.zeros(n)
        c[-1] = 1.0
        dleg = np.polynomial.legendre.Legendre(c).deriv()
        nodes = np.concatenate(([-1.0], dleg.roots(), [1.0]))
    return 0.5 * (nodes + 1.0)


def lagrange_values(nodes, x):
    """Values of the Lagrange basis on `nodes` at points `x`, shape (len(x), len(nodes))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(nodes)
    out = np.ones((len(x), n))
    for i in range(n):
        for j in range(n):
            if j != i:
                out[:, i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
    return out


def lagrange_derivatives(nodes, x):
    """First derivatives of the Lagrange basis on `nodes` at points `x`."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(nodes)
    out = np.zeros((len(x), n))
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            term = np.ones(len(x)) / (nodes[i] - nodes[k])
            for j in range(n):
                if j != i and j != k:
                    term *= (x - nodes[j]) / (nodes[i] - nodes[j])
            out[:, i] += term
    return out
