"""Bounded while loops for the jitted integrators."""

import jax
import jax.numpy as jnp


def _bounded_loop_python(cond_fun, body_fun, init_val, max_iter):
    """Eager loop; useful for stepping through an integrator outside jit."""
    val, it = init_val, 0
    while it < max_iter and bool(cond_fun(val)):
        val = body_fun(val)
        it += 1
    return it, val


def _bounded_loop_lax(cond_fun, body_fun, init_val, max_iter):
    def _cond_fun(carry):
        it, val = carry
        return jnp.logical_and(cond_fun(val), it < max_iter)

    def _body_fun(carry):
        it, val = carry
        return it + 1, body_fun(val)

    return jax.lax.while_loop(_cond_fun, _body_fun, (jnp.asarray(0), init_val))


def while_loop(cond_fun, body_fun, init_val, max_iter, jit=True):
    """
    Run body_fun while cond_fun holds, at most max_iter times.

    Parameters
    ----------
    cond_fun, body_fun : callable
        Loop predicate and update on the carried state.
    init_val : pytree
        Initial state.
    max_iter : int
        Iteration cap.
    jit : bool
        Use lax.while_loop (traceable, vmappable) rather than a Python loop.

    Returns
    -------
    iterations : int
        Number of executed iterations.
    val : pytree
        Final state.
    """
    if jit:
        return _bounded_loop_lax(cond_fun, body_fun, init_val, max_iter)
    return _bounded_loop_python(cond_fun, body_fun, init_val, max_iter)
