"""Adam updates and the warm-restart cosine schedule."""

import numpy as np
import pytest

from swishnet.errors import TrainingError
from swishnet.optim import ADAM_EPS, AdamState, adam_init, adam_step, sgdr_lr, sgdr_schedule
from swishnet.tensor import Tensor


class TestAdam:
    def test_first_step_sign_limit(self):
        params = {"w": Tensor(np.array([1.0]), requires_grad=True)}
        state = adam_init(params)
        g = np.array([0.5])
        adam_step(state, params, {"w": g}, lr=1e-3)
        delta = params["w"].data[0] - 1.0
        # first bias-corrected step is -lr * g/(|g| + eps): the sign-step limit
        assert abs(delta - (-1e-3)) / 1e-3 < 1e-6

    def test_zero_gradient_no_change(self):
        params = {"w": Tensor(np.ones(4), requires_grad=True)}
        state = adam_init(params)
        adam_step(state, params, {"w": np.zeros(4)}, lr=1e-2)
        np.testing.assert_array_equal(params["w"].data, np.ones(4))

    def test_deterministic_trajectories(self):
        def run():
            rng = np.random.default_rng(0)
            params = {"w": Tensor(np.ones(6), requires_grad=True)}
            state = adam_init(params)
            for _ in range(25):
                adam_step(state, params, {"w": rng.standard_normal(6)}, lr=1e-3)
            return params["w"].data

        np.testing.assert_array_equal(run(), run())

    def test_nonfinite_gradient_names_parameter(self):
        params = {"bad.w": Tensor(np.ones(2), requires_grad=True)}
        state = adam_init(params)
        with pytest.raises(TrainingError, match="bad.w"):
            adam_step(state, params, {"bad.w": np.array([1.0, np.nan])}, lr=1e-3)


class TestSgdr:
    def test_closed_form_anchors(self):
        base, minimum, period = 1e-3, 1e-5, 10.0
        assert abs(sgdr_lr(0.0, period, base, minimum) - base) < 1e-12
        assert abs(sgdr_lr(period, period, base, minimum) - minimum) < 1e-12
        assert abs(sgdr_lr(period / 2, period, base, minimum) - (base + minimum) / 2) < 1e-12

    def test_schedule_restarts(self):
        lrs = sgdr_schedule(70, base_lr=1e-3, min_lr=1e-5, period=10, period_mult=2)
        # restarts at epochs 10 and 30 (periods 10, 20, 40)
        assert lrs[0] == pytest.approx(1e-3)
        assert lrs[10] == pytest.approx(1e-3)
        assert lrs[30] == pytest.approx(1e-3)
        assert lrs[9] < lrs[10]
        assert lrs[29] < lrs[30]

    def test_continuous_within_period(self):
        lrs = sgdr_schedule(10, base_lr=1e-3, min_lr=1e-5, period=10, period_mult=2)
        diffs = np.diff(lrs)
        assert (diffs < 0).all()  # strictly decreasing inside one period
        assert np.max(np.abs(np.diff(diffs))) < 5e-5  # no jumps
