"""Distillation objective: temperature-softened teacher targets mixed with
the true-label cross-entropy at a 0.9/0.1 weighting."""

import numpy as np

from . import ops
from .tensor import Tensor, as_tensor, from_op


def soft_cross_entropy(student_logits, teacher_logits, temperature: float) -> Tensor:
    """Cross-entropy between softened teacher and student distributions
    (mean over the batch, no temperature-squared scaling).

    The teacher side is a constant: gradients flow to the student only, and
    vanish when the two logit sets match.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    student = as_tensor(student_logits)
    single = student.data.ndim == 1
    s = student.data[None] if single else student.data
    t = np.asarray(teacher_logits, dtype=np.float64)
    t = t[None] if t.ndim == 1 else t
    p_teacher = np.exp(ops.log_softmax_data(t / temperature))
    log_q = ops.log_softmax_data(s / temperature)
    n = s.shape[0]
    loss = float(-(p_teacher * log_q).sum() / n)

    def bwd(g):
        q = np.exp(log_q)
        grad = (q - p_teacher) * (float(g) / (temperature * n))
        student.accumulate_grad(grad[0] if single else grad)

    return from_op(np.float64(loss), (student,), bwd)


def distill_loss(
    student_logits,
    teacher_logits,
    labels,
    temperature: float,
    soft_weight: float = 0.9,
) -> Tensor:
    """soft_weight * T^2 * soft_cross_entropy + (1 - soft_weight) * cross_entropy.

    The temperature-squared factor keeps the soft-term gradient magnitude
    comparable across temperatures; soft_weight=0 reduces exactly to the
    plain cross-entropy.
    """
    hard = ops.cross_entropy(student_logits, labels)
    if soft_weight == 0.0:
        return hard
    soft = soft_cross_entropy(student_logits, teacher_logits, temperature)
    return soft * (soft_weight * temperature**2) + hard * (1.0 - soft_weight)
