"""Finite-difference verification of tape gradients."""

import numpy as np

from .tensor import Tensor


def finite_diff_check(
    fn,
    inputs: list[Tensor],
    h: float = 1e-5,
    sample: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max discrepancy between tape and central-difference gradients.

    fn maps the given Tensors to a scalar Tensor. Every entry of every input
    is perturbed (or a seeded sample of `sample` entries per input, for large
    parameter sets). The returned figure is the largest |tape - fd| across
    checked entries, normalized by the largest gradient magnitude seen, so it
    reads as a relative error at the gradient's own scale.
    """
    for t in inputs:
        t.requires_grad = True
        t.zero_grad()
    loss = fn(*inputs)
    loss.backward()
    tape_grads = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]
    for t in inputs:
        t.requires_grad = False  # fd evaluations do not need the tape

    worst_abs = 0.0
    scale = 1e-8
    for t, tape in zip(inputs, tape_grads):
        flat = t.data.reshape(-1)
        n = flat.size
        if sample is not None and n > sample:
            if rng is None:
                rng = np.random.default_rng(0)
            entries = rng.choice(n, size=sample, replace=False)
        else:
            entries = range(n)
        for i in entries:
            original = flat[i]
            flat[i] = original + h
            up = float(fn(*inputs).data)
            flat[i] = original - h
            down = float(fn(*inputs).data)
            flat[i] = original
            fd = (up - down) / (2.0 * h)
            g = tape.reshape(-1)[i]
            worst_abs = max(worst_abs, abs(g - fd))
            scale = max(scale, abs(g), abs(fd))
    return worst_abs / scale
