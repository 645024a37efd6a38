import numpy as np
import pytest

from saan.center_loss import (
    CenterUpdateSchedule,
    LossWeights,
    center_momentum_update,
    pull_loss,
    pull_loss_descent,
    push_loss,
    push_loss_grad,
    weighted_embedding_gradient,
)
from saan.centers import assign_base_session, generate_orthonormal_centers
from saan.errors import InvalidConfigError, UnassignedLabelError, ZeroNormError
from saan.geometry import normalize

from oracles import central_difference, relative_error


def fitted_bank(d, n_classes, seed=0):
    """Bank with n_classes assigned centers, means perturbed off the axes."""
    rng = np.random.default_rng(seed)
    bank = generate_orthonormal_centers(d, seed)
    means = {j: bank.centers[j] + 0.3 * rng.standard_normal(d) for j in range(n_classes)}
    return assign_base_session(bank, means)


class TestPullLoss:
    def test_at_center(self):
        bank = fitted_bank(4, 2)
        c = bank.center_for(0)
        assert pull_loss(c[None, :], [0], bank) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_to_center(self):
        bank = fitted_bank(4, 2)
        other = bank.center_for(1)  # orthogonal to center 0 by construction
        assert pull_loss(other[None, :], [0], bank) == pytest.approx(1.0, abs=1e-8)

    def test_opposite_center(self):
        bank = fitted_bank(4, 2)
        e = -bank.center_for(0)
        assert pull_loss(e[None, :], [0], bank) == pytest.approx(2.0, abs=1e-12)

    def test_scale_invariance(self):
        bank = fitted_bank(5, 3)
        rng = np.random.default_rng(1)
        e = rng.standard_normal(5)
        for s in (1e-3, 0.5, 7.0, 1e3):
            a = pull_loss(e[None, :], [1], bank)
            b = pull_loss((s * e)[None, :], [1], bank)
            assert abs(a - b) <= 1e-12

    def test_unassigned_label(self):
        bank = fitted_bank(4, 2)
        with pytest.raises(UnassignedLabelError):
            pull_loss(np.ones((1, 4)), [9], bank)


class TestPushLoss:
    def test_orthogonal_to_others_is_zero(self):
        bank = fitted_bank(4, 3)
        e = bank.center_for(0)  # orthogonal to centers 1 and 2
        assert push_loss(e[None, :], [0], bank) == pytest.approx(0.0, abs=1e-8)

    def test_on_other_center_two_classes(self):
        bank = fitted_bank(4, 2)
        e = bank.center_for(1)
        assert push_loss(e[None, :], [0], bank) == pytest.approx(0.5, abs=1e-8)

    def test_opposite_other_center(self):
        bank = fitted_bank(4, 2)
        e = -bank.center_for(1)
        assert push_loss(e[None, :], [0], bank) == pytest.approx(-0.5, abs=1e-8)

    def test_scale_invariance(self):
        bank = fitted_bank(6, 4)
        rng = np.random.default_rng(2)
        e = rng.standard_normal(6)
        base = push_loss(e[None, :], [2], bank)
        for s in (1e-3, 3.0, 1e3):
            assert abs(push_loss((s * e)[None, :], [2], bank) - base) <= 1e-12


class TestGradients:
    def test_pull_descent_at_center_is_zero(self):
        bank = fitted_bank(4, 2)
        c = bank.center_for(0)
        v = pull_loss_descent(c, c, 3)
        assert np.allclose(v, 0.0, atol=1e-12)

    def test_pull_descent_plugged_example(self):
        # e=[1,0], c=[0,1]: the cosine term vanishes and the descent is c itself
        v = pull_loss_descent(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 1)
        assert np.allclose(v, [0.0, 1.0], atol=1e-15)

    def test_pull_descent_matches_finite_difference(self):
        # the descent direction is the negative gradient of (1/m)(1 - cos)
        rng = np.random.default_rng(3)
        for _ in range(30):
            d = int(rng.integers(3, 8))
            bank = fitted_bank(d, 2, seed=int(rng.integers(1000)))
            e = rng.standard_normal(d) * rng.uniform(0.5, 2.0)
            m = int(rng.integers(1, 5))
            c = bank.center_for(0)
            fd = central_difference(
                lambda v: (1.0 / m) * pull_loss(v[None, :], [0], bank), e
            )
            assert relative_error(-pull_loss_descent(e, c, m), fd) <= 1e-5

    def test_push_grad_single_other_class(self):
        bank = fitted_bank(4, 2)
        e = 2.0 * bank.center_for(0)
        v = push_loss_grad(e, bank, 0, 1)
        expect = bank.center_for(1) / np.linalg.norm(e) / 2.0
        assert np.allclose(v, expect, atol=1e-8)

    def test_push_grad_collinear_with_sole_other_center(self):
        bank = fitted_bank(4, 2)
        e = 3.0 * bank.center_for(1)
        v = push_loss_grad(e, bank, 0, 1)
        assert np.allclose(v, 0.0, atol=1e-12)

    def test_push_grad_matches_finite_difference(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            d = int(rng.integers(3, 8))
            k = int(rng.integers(2, d + 1))
            bank = fitted_bank(d, k, seed=int(rng.integers(1000)))
            e = rng.standard_normal(d) * rng.uniform(0.5, 2.0)
            label = int(rng.integers(0, k))
            m = int(rng.integers(1, 4))
            fd = central_difference(
                lambda v: (1.0 / m) * push_loss(v[None, :], [label], bank), e
            )
            assert relative_error(push_loss_grad(e, bank, label, m), fd) <= 1e-5

    def test_perpendicularity(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            d = int(rng.integers(3, 10))
            bank = fitted_bank(d, 2, seed=int(rng.integers(10000)))
            e = rng.standard_normal(d) * rng.uniform(0.2, 5.0)
            for v in (pull_loss_descent(e, bank.center_for(0), 1),
                      push_loss_grad(e, bank, 0, 1)):
                bound = 1e-10 * np.linalg.norm(v) * np.linalg.norm(e)
                assert abs(float(v @ e)) <= max(bound, 1e-30)

    def test_weighted_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(6)
        for d in (4, 16):
            for _ in range(50):
                k = int(rng.integers(2, min(d, 6) + 1))
                bank = fitted_bank(d, k, seed=int(rng.integers(10000)))
                e = rng.standard_normal(d) * rng.uniform(0.5, 2.0)
                label = int(rng.integers(0, k))
                w = LossWeights(pull=float(rng.uniform(0.5, 3.0)),
                                push=float(rng.uniform(0.1, 1.0)))

                def total(v):
                    return (w.pull * pull_loss(v[None, :], [label], bank)
                            + w.push * push_loss(v[None, :], [label], bank))

                analytic = weighted_embedding_gradient(e[None, :], [label], bank, w)[0]
                fd = central_difference(total, e)
                assert relative_error(analytic, fd) <= 1e-4


class TestMomentumUpdate:
    def test_worked_example(self):
        sched = CenterUpdateSchedule(initial_rate=0.5)
        out = center_momentum_update(np.array([1.0, 0.0]), np.array([[0.0, 1.0]]), 1, sched)
        assert np.allclose(out, [1.0 / np.sqrt(1.25), 0.5 / np.sqrt(1.25)], atol=1e-12)

    def test_zero_rate_keeps_center(self):
        sched = CenterUpdateSchedule(initial_rate=1.0)
        sched.current_rate = 0.0
        c = normalize(np.array([2.0, 1.0]))
        out = center_momentum_update(c, np.array([[0.0, 1.0]]), 1, sched)
        assert np.allclose(out, c, atol=1e-15)

    def test_collinear_sample_keeps_center(self):
        sched = CenterUpdateSchedule(initial_rate=0.7)
        c = normalize(np.array([1.0, 2.0, 0.0]))
        out = center_momentum_update(c, np.array([c * 5.0]), 1, sched)
        assert np.allclose(out, c, atol=1e-12)

    def test_empty_class_skips(self):
        sched = CenterUpdateSchedule()
        c = np.array([1.0, 0.0])
        out = center_momentum_update(c, np.empty((0, 2)), 4, sched)
        assert np.array_equal(out, c)

    def test_result_unit_norm(self):
        rng = np.random.default_rng(7)
        sched = CenterUpdateSchedule(initial_rate=1.5)
        c = normalize(rng.standard_normal(6))
        for _ in range(100):
            rows = rng.standard_normal((3, 6))
            c = center_momentum_update(c, rows, 8, sched)
            assert abs(np.linalg.norm(c) - 1.0) <= 1e-12

    def test_equals_gradient_descent_on_normalized_center(self):
        # descent on the pull loss wrt the center, then renormalize
        rng = np.random.default_rng(8)
        for _ in range(1000):
            d = int(rng.integers(2, 8))
            c = normalize(rng.standard_normal(d))
            m = int(rng.integers(1, 6))
            n_cls = int(rng.integers(1, m + 1))
            rows = rng.standard_normal((n_cls, d)) * rng.uniform(0.2, 3.0)
            eta = float(rng.uniform(0.05, 2.0))
            sched = CenterUpdateSchedule(initial_rate=eta)
            momentum = center_momentum_update(c, rows, m, sched)
            grad = -np.sum([normalize(r) for r in rows], axis=0) / m
            descent = normalize(c - eta * grad)
            assert np.max(np.abs(momentum - descent)) <= 1e-10

    def test_degenerate_update_errors(self):
        sched = CenterUpdateSchedule(initial_rate=1.0)
        c = np.array([1.0, 0.0])
        with pytest.raises(ZeroNormError):
            center_momentum_update(c, np.array([[-1.0, 0.0]]), 1, sched)


class TestSchedule:
    def test_geometric_decay(self):
        sched = CenterUpdateSchedule(initial_rate=0.5, decay_factor=0.1)
        sched.decay()
        sched.decay()
        assert sched.current_rate == pytest.approx(0.005, abs=1e-15)

    def test_constant_when_factor_one(self):
        sched = CenterUpdateSchedule(initial_rate=0.5, decay_factor=1.0)
        for _ in range(5):
            sched.decay()
        assert sched.current_rate == 0.5

    def test_reset(self):
        sched = CenterUpdateSchedule(initial_rate=0.5, decay_factor=0.1)
        sched.decay()
        sched.reset()
        assert sched.current_rate == 0.5

    def test_validation(self):
        with pytest.raises(InvalidConfigError):
            CenterUpdateSchedule(initial_rate=0.0)
        with pytest.raises(InvalidConfigError):
            CenterUpdateSchedule(decay_factor=0.0)
        with pytest.raises(InvalidConfigError):
            CenterUpdateSchedule(decay_factor=1.5)


def test_loss_weights_validation():
    with pytest.raises(InvalidConfigError):
        LossWeights(pull=-1.0)
    with pytest.raises(InvalidConfigError):
        LossWeights(push=-0.1)
