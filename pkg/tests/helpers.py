"""Shared test utilities: independent finite-difference oracles and small
builders.  These deliberately avoid the library's own finite-difference
code so the comparisons stay two-sided."""

import numpy as np

from curvact import activations as act
from curvact.activations import rct_af
from curvact.network import (
    backprop_deltas,
    flat_params,
    forward,
    init_network,
    loss,
    replace_params,
)


def fd_first(fn, x, h=1e-5):
    """Central first difference of a scalar or vectorized function."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def fd_second(fn, x, h=1e-5):
    """Central second difference of a scalar or vectorized function."""
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


def fd_loss_diag(net, x, y, h=1e-4):
    """Second central difference of the loss along each parameter axis."""
    theta = flat_params(net)
    base = loss(net, x, y)
    out = np.empty(theta.size)
    for k in range(theta.size):
        up = theta.copy()
        up[k] += h
        down = theta.copy()
        down[k] -= h
        out[k] = (
            loss(replace_params(net, up), x, y)
            - 2.0 * base
            + loss(replace_params(net, down), x, y)
        ) / (h * h)
    return out


def hessian_diag_full(net, x, y):
    """Hessian diagonal via full-matrix curvature backpropagation.

    Carries the complete matrix of output second derivatives with respect
    to each layer's pre-activations instead of only its diagonal, so
    interactions between sibling neurons in the same hidden layer survive.
    Exact at any depth; anchors the tests that document where the
    element-wise recursion stops being exact (three or more hidden
    layers).
    """
    trace = forward(net, x)
    deltas = backprop_deltas(net, trace)
    L = net.depth
    curv = [None] * L
    curv[L - 1] = np.zeros(1)
    H = np.zeros((1, 1))
    for l in range(L - 2, -1, -1):
        W_next = net.weights[l + 1]
        s = W_next.T @ deltas.delta[l + 1]
        sig1 = act.d1(net.activation, trace.z[l])
        sig2 = act.d2(net.activation, trace.z[l])
        H = np.diag(sig2 * s) + np.outer(sig1, sig1) * (W_next.T @ H @ W_next)
        curv[l] = np.diag(H).copy()
    residual = trace.f - float(y)
    parts = []
    for l in range(L):
        dl = deltas.delta[l]
        h_prev_sq = trace.h[l] * trace.h[l]
        parts.append(np.outer(dl * dl + residual * curv[l], h_prev_sq).ravel())
        parts.append(dl * dl + residual * curv[l])
    return np.concatenate(parts)


def small_net(widths=(2, 3, 1), alpha=4.0, beta=1, seed=0):
    """A compact randomly initialized network for structural tests."""
    return init_network(tuple(widths), rct_af(alpha, beta), seed=seed)


def random_sample(rng, net):
    """One (input, label) pair sized for the given network."""
    x = rng.normal(size=net.widths[0])
    y = float(rng.choice((-1.0, 1.0)))
    return x, y
