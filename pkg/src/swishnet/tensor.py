"""Reverse-mode automatic differentiation over numpy arrays.

Each derived Tensor records its parent tensors and a backward closure; the
implicit tape is the creation order. backward() replays closures in reverse
creation order, visiting every node exactly once, so gradients at fan-out
points accumulate additively.
"""

import itertools

import numpy as np

from .errors import ShapeError

_SEQ = itertools.count()


class Tensor:
    """N-d float array plus gradient bookkeeping."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_seq")

    def __init__(self, data, requires_grad: bool = False):
        data = np.asarray(data)
        if data.dtype not in (np.float64, np.float32):
            data = data.astype(np.float64)
        self.data = data
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None
        self._seq = next(_SEQ)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype)
        else:
            self.grad = self.grad + g

    def backward(self, grad=None) -> None:
        """Backpropagate from this tensor through everything that produced it."""
        if grad is None:
            if self.data.size != 1:
                raise ShapeError("backward() without an explicit gradient needs a scalar")
            grad = np.ones_like(self.data)
        self.accumulate_grad(np.asarray(grad, dtype=self.data.dtype))

        nodes = []
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if node._backward is not None:
                nodes.append(node)
            stack.extend(node._parents)
        # parents always precede children in creation order, so descending
        # sequence order is a valid reverse-topological order
        nodes.sort(key=lambda n: n._seq, reverse=True)
        for node in nodes:
            if node.grad is not None:
                node._backward(node.grad)

    # minimal arithmetic, used for combining scalar losses
    def __add__(self, other):
        if not isinstance(other, Tensor):
            other = Tensor(np.asarray(other, dtype=self.data.dtype))
        if other.shape != self.shape:
            raise ShapeError(f"add: shapes {self.shape} and {other.shape} differ")

        def bwd(g):
            if self.requires_grad:
                self.accumulate_grad(g)
            if other.requires_grad:
                other.accumulate_grad(g)

        return from_op(self.data + other.data, (self, other), bwd)

    def __mul__(self, scalar):
        scalar = float(scalar)
        return from_op(self.data * scalar, (self,),
                       lambda g: self.accumulate_grad(g * scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def from_op(data: np.ndarray, parents: tuple, backward) -> Tensor:
    """Create a derived tensor; tracks gradients only if some parent does."""
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out
