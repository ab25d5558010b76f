import numpy as np
import pytest

from zonopt import (AffineLayer, FeedForwardNetwork, Hyperrectangle, Zonotope,
                    affine_transform, propagate, propagate_with_bounds, relu_transform)

from oracles import random_network


def test_affine_transform_known_values():
    z = Zonotope([1.0, -2.0], [[1.0, 0.0], [0.0, 2.0]])
    same = affine_transform(z, np.eye(2), np.zeros(2))
    assert np.array_equal(same.center, z.center)
    assert np.array_equal(same.generators, z.generators)
    z = Zonotope([1.0, 1.0], np.eye(2))
    out = affine_transform(z, np.array([[2.0, 0.0]]), np.array([1.0]))
    assert np.array_equal(out.center, [3.0])
    assert np.array_equal(out.generators, [[2.0, 0.0]])


def test_affine_transform_exactness():
    rng = np.random.default_rng(40)
    for _ in range(30):
        n, m, k = (int(v) for v in rng.integers(1, 5, size=3))
        z = Zonotope(rng.normal(size=n), rng.normal(size=(n, k)))
        w = rng.normal(size=(m, n))
        b = rng.normal(size=m)
        out = affine_transform(z, w, b)
        coeffs = rng.uniform(-1, 1, size=(k, 50))
        points = w @ (z.generators @ coeffs + z.center[:, None]) + b[:, None]
        assert out.contains_points(points, tol=1e-9).all()
        a = rng.normal(size=m)
        samples = a @ points
        assert out.support_max(a) >= samples.max() - 1e-9
        assert out.support_min(a) <= samples.min() + 1e-9


def test_relu_transform_stable_cases():
    positive = relu_transform(Zonotope([2.0], [[1.0]]))
    assert np.array_equal(positive.center, [2.0])
    assert np.array_equal(positive.generators, [[1.0]])
    negative = relu_transform(Zonotope([-2.0], [[1.0]]))
    assert np.array_equal(negative.center, [0.0])
    assert np.array_equal(negative.generators, [[0.0]])


def test_relu_transform_unstable_coefficients():
    out = relu_transform(Zonotope([0.0], [[1.0]]))
    assert np.allclose(out.center, [0.25])
    assert np.allclose(out.generators, [[0.5, 0.25]])


def test_relu_transform_soundness_sampling():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        z = Zonotope(rng.normal(size=n), rng.normal(size=(n, int(rng.integers(1, 6)))))
        out = relu_transform(z)
        coeffs = rng.uniform(-1, 1, size=(z.n_generators, 200))
        rectified = np.maximum(z.generators @ coeffs + z.center[:, None], 0.0)
        assert out.contains_points(rectified, tol=1e-9).all()


def test_relu_transform_fresh_generator_layout():
    # one fresh generator per unstable row, appended in row order
    z = Zonotope([5.0, 0.0, -5.0, 0.0], np.eye(4))
    out = relu_transform(z)
    assert out.generators.shape == (4, 6)
    fresh = out.generators[:, 4:]
    assert fresh[1, 0] != 0.0 and fresh[3, 1] != 0.0
    assert fresh[0, 0] == fresh[2, 0] == fresh[0, 1] == fresh[1, 1] == 0.0


def test_propagate_identity_network():
    z = Zonotope([1.0, 2.0], [[1.0, 0.5], [0.0, 1.0]])
    out = propagate(FeedForwardNetwork.identity(2), z)
    assert np.array_equal(out.center, z.center)
    assert np.array_equal(out.generators, z.generators)


def test_propagate_stable_network_is_exact():
    # large positive biases keep every neuron active: propagation equals the
    # exact affine image, generator matrices included
    rng = np.random.default_rng(42)
    w1, w2 = rng.normal(size=(3, 2)), rng.normal(size=(2, 3))
    net = FeedForwardNetwork([AffineLayer(w1, np.full(3, 50.0), "relu"),
                              AffineLayer(w2, np.zeros(2), "identity")])
    z = Zonotope(np.zeros(2), np.eye(2))
    out = propagate(net, z)
    assert np.allclose(out.center, w2 @ np.full(3, 50.0))
    assert np.allclose(out.generators, w2 @ w1)
    xs = z.sample(rng, 100)
    ys = net.evaluate_batch(xs)
    assert out.contains_points(ys, tol=1e-9).all()


def test_propagate_soundness_random_networks():
    rng = np.random.default_rng(43)
    for _ in range(40):
        depth = int(rng.integers(1, 4))
        sizes = [int(rng.integers(1, 4))] + \
                [int(rng.integers(1, 9)) for _ in range(depth)] + [int(rng.integers(1, 4))]
        net = random_network(rng, sizes)
        box = Hyperrectangle(rng.normal(size=sizes[0]), rng.uniform(0.1, 1.5, size=sizes[0]))
        out = propagate(net, box.to_zonotope())
        ys = net.evaluate_batch(box.sample(rng, 1000))
        assert out.contains_points(ys, tol=1e-7).all()


def test_propagate_children_sound_and_converging():
    # Child boxes are not subsets of the parent box in general: the rectifier
    # relaxation picks different slopes for tighter pre-activation bounds, so
    # a child's overapproximation can poke out sideways even though both
    # enclose the true image.  What branch and bound needs, and what is
    # asserted here, is that children stay sound and that cell bounds
    # converge to the truth as cells shrink.
    rng = np.random.default_rng(44)
    for _ in range(20):
        net = random_network(rng, [1, 5, 4, 2])
        box = Hyperrectangle(rng.normal(size=1) * 0.3, rng.uniform(0.3, 1.0, size=1))
        direction = rng.normal(size=2)
        samples = direction @ net.evaluate_batch(
            np.linspace(box.lower[0], box.upper[0], 2001)[None, :])
        true_min = float(samples.min())

        cells = [box]
        level_bound = None
        for _ in range(9):
            level_bound = min(propagate(net, c.to_zonotope()).support_min(direction)
                              for c in cells)
            assert level_bound <= true_min + 1e-9  # sound at every depth
            cells = [grand for c in cells for grand in c.split()]
        assert level_bound >= true_min - 0.02  # and tight once cells are small


def test_propagate_generator_growth_bound():
    rng = np.random.default_rng(45)
    for _ in range(30):
        sizes = [2, int(rng.integers(1, 8)), int(rng.integers(1, 8)), 2]
        net = random_network(rng, sizes)
        z = Zonotope(rng.normal(size=2), rng.normal(size=(2, 3)))
        out = propagate(net, z)
        total_neurons = sum(sizes[1:-1])
        assert out.n_generators <= z.n_generators + total_neurons


def test_propagate_with_bounds_layers():
    rng = np.random.default_rng(46)
    net = random_network(rng, [2, 4, 3, 2])
    z = Zonotope(np.zeros(2), 0.5 * np.eye(2))
    out, bounds = propagate_with_bounds(net, z)
    plain = propagate(net, z)
    assert np.array_equal(out.center, plain.center)
    assert np.array_equal(out.generators, plain.generators)
    assert len(bounds) == len(net.layers)
    for per_layer in bounds:
        assert np.all(per_layer.lower <= per_layer.upper + 1e-12)
    # pre-activation bounds of the first layer are exact over the input set
    w, b = net.layers[0].weights, net.layers[0].bias
    xs = z.sample(rng, 500)
    pre = w @ xs + b[:, None]
    assert np.all(pre.min(axis=1) >= bounds[0].lower - 1e-9)
    assert np.all(pre.max(axis=1) <= bounds[0].upper + 1e-9)


def test_dimension_validation():
    with pytest.raises(ValueError):
        affine_transform(Zonotope([0.0], [[1.0]]), np.ones((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        propagate(FeedForwardNetwork.identity(2), Zonotope([0.0], [[1.0]]))
