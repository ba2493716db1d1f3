"""Smoke tests for the compiled lsbound module."""

import math

import pytest

import lsbound


def test_version_and_rng():
    assert lsbound.__version__
    assert lsbound.rng_name == "philox4x32-10"


def test_kl_closed_forms():
    q = lsbound.DiagonalGaussian([1.0], [1.0])
    p = lsbound.DiagonalGaussian([0.0], [1.0])
    assert lsbound.kl_diag_gaussian(q, p) == pytest.approx(0.5, abs=1e-12)
    assert lsbound.kl_diag_gaussian(p, p) == 0.0
    wide = lsbound.DiagonalGaussian([0.0], [4.0])
    assert lsbound.kl_diag_gaussian(p, wide) == pytest.approx(
        math.log(2.0) + 0.125 - 0.5, abs=1e-12
    )


def test_kl_rejects_zero_prior_variance():
    q = lsbound.DiagonalGaussian([0.0], [1.0])
    p = lsbound.DiagonalGaussian([0.0], [0.0])
    with pytest.raises(ValueError):
        lsbound.kl_diag_gaussian(q, p)


def test_functional_entropy_two_point():
    e = math.e
    expected = e / 2.0 - (1.0 + e) / 2.0 * math.log((1.0 + e) / 2.0)
    assert lsbound.functional_entropy([1.0, e], [0.5, 0.5]) == pytest.approx(expected, abs=1e-12)
    assert lsbound.functional_entropy([0.0, 2.0], [0.5, 0.5]) == pytest.approx(
        math.log(2.0), abs=1e-12
    )


def test_sampling_is_deterministic():
    mix = lsbound.axis_mixture(3, 4, 1.0, 0.5)
    a = lsbound.sample_mixture(mix, 50, 9)
    b = lsbound.sample_mixture(mix, 50, 9)
    assert a == b
    c = lsbound.sample_mixture(mix, 50, 10)
    assert a != c


def test_rademacher_lsi_holds():
    gap = lsbound.rademacher_lsi_gap(lambda z: z[0], 1)
    expected_lhs = math.sinh(1.0) - math.cosh(1.0) * math.log(math.cosh(1.0))
    assert gap.lhs == pytest.approx(expected_lhs, abs=1e-12)
    assert gap.lhs <= gap.rhs


def test_network_forward_and_gradients():
    net = lsbound.make_linear(2, 2)
    net.set_weights([1.0, 0.0, 0.0, 1.0])
    assert lsbound.forward(net, [0.3, -0.7]) == [0.3, -0.7]
    assert lsbound.loss(net, [0.0, 0.0], 0, "nll") == pytest.approx(math.log(2.0))
    grad = lsbound.input_gradient(net, [0.0, 0.0], 0, "nll")
    assert grad == pytest.approx([-0.5, 0.5], abs=1e-12)


def test_linear_bound_calculators():
    assert lsbound.linear_lambda_max(2.0, 0.1, 1.0, 1600) == pytest.approx(50.0)
    assert lsbound.linear_complexity(1, 1) == pytest.approx(0.5 * math.log(4.0 / 3.0))
    assert lsbound.baseline_bounded_complexity(1.0, 100.0, 100) == pytest.approx(50.0)
    assert lsbound.gaussian_quadratic_mgf(0.5, 0.5, 1) == pytest.approx(math.log(math.sqrt(2.0)))


def test_training_and_per_w_pipeline():
    mix = lsbound.axis_mixture(3, 4, 2.0, 0.3)
    data = lsbound.sample_mixture(mix, 128, 5)
    net = lsbound.make_mlp(4, 3, 2)
    lsbound.init_uniform_fanin(net, 7)
    cfg = lsbound.TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=32, epochs=20, seed=5)
    trace = lsbound.sgd_train(net, data, cfg)
    assert len(trace.epoch_loss) == 20
    assert trace.epoch_loss[-1] < trace.epoch_loss[0]

    arch = lsbound.make_mlp(4, 3, 2)
    prior = lsbound.DiagonalGaussian.isotropic(arch.weight_count(), 0.0, 0.01)
    inp = lsbound.BoundInput(
        lambda_=64.0,
        m=128,
        delta=0.01,
        sigma_p2=0.01,
        sigma_y=lsbound.SigmaY.from_mixture(mix),
        mc=lsbound.McSettings(n_prior=8, n_data=256, seed=3),
    )
    c = lsbound.per_w_complexity(arch, "nll", prior, mix, inp)
    assert c.value >= 0.0
    assert not c.overflow
    report = lsbound.assemble_bound(0.25, c.value, 10.0, inp, "per_w")
    assert report.rhs == pytest.approx(0.25 + (c.value + 10.0 + math.log(100.0)) / 64.0)


def test_lambda_over_m_raises():
    mix = lsbound.axis_mixture(2, 2, 1.0, 0.5)
    arch = lsbound.make_linear(2, 2)
    prior = lsbound.DiagonalGaussian.isotropic(arch.weight_count(), 0.0, 0.01)
    inp = lsbound.BoundInput(lambda_=100.0, m=16)
    with pytest.raises(RuntimeError):
        lsbound.per_w_complexity(arch, "nll", prior, mix, inp)


def test_herbst_identity_small():
    mix = lsbound.LabeledMixture([1.0], [lsbound.DiagonalGaussian([0.0], [1.0])])
    lhs = lsbound.herbst_lhs(lambda x, y: x[0] * x[0], mix, 4.0, 4, 20000, 11)
    grid = lsbound.herbst_alpha_grid(1.0, 64)
    rhs = lsbound.herbst_rhs(lambda x, y: x[0] * x[0], mix, 4.0, 4, grid, 20000, 11)
    sigma = math.hypot(lhs.std_error, rhs.estimate.std_error)
    assert abs(lhs.value - rhs.estimate.value) <= 3.0 * sigma + 1e-3


def test_python_callback_across_worker_threads():
    # n larger than one reduction chunk forces the thread-pool path; the
    # callback must keep working (GIL released outside, acquired per call).
    mix = lsbound.LabeledMixture([1.0], [lsbound.DiagonalGaussian([0.0], [1.0])])
    est = lsbound.functional_entropy_mc(lambda x, y: math.exp(x[0]), mix, 150000, 3)
    closed = 0.5 * math.exp(0.5)
    assert abs(est.value - closed) <= 3.0 * est.std_error + 1e-3


def test_checkpoint_roundtrip(tmp_path):
    net = lsbound.make_mlp(6, 3, 2)
    lsbound.init_gaussian(net, 0.1, 3)
    path = str(tmp_path / "model.ckpt")
    lsbound.save_checkpoint(net, path)
    back = lsbound.load_checkpoint(path)
    assert back.get_weights() == net.get_weights()
    assert back.describe() == net.describe()
