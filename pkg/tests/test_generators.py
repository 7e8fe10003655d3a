import random

import pytest

from lanecert.generators import (
    FAMILIES,
    GeneratorError,
    GeneratorSpec,
    generate,
    witness_bound,
)
from lanecert.graph import is_connected
from lanecert.intervals import validate, width
from lanecert.properties import brute_force_property


def test_path_family():
    g, ir = generate(GeneratorSpec("path", 6), 0)
    assert list(g.edges) == [(i, i + 1) for i in range(5)]
    assert width(ir) == 2 and witness_bound(ir) == 1


def test_cycle_family():
    g, ir = generate(GeneratorSpec("cycle", 5), 0)
    assert len(g.edges) == 5
    assert all(len([e for e in g.edges if v in e]) == 2 for v in range(5))
    assert width(ir) == 3
    with pytest.raises(GeneratorError):
        generate(GeneratorSpec("cycle", 2), 0)


def test_caterpillar_family():
    for n in range(2, 20):
        g, ir = generate(GeneratorSpec("caterpillar", n), 0)
        assert len(g.edges) == n - 1
        assert is_connected(g)
        assert width(ir) <= 3 and witness_bound(ir) <= 2
        assert brute_force_property(g, "acyclic", limit=n)
        if n % 2 == 0 and n <= 10:
            # Legs pair off with their spine vertices: a perfect matching.
            assert brute_force_property(g, "matching")


def test_random_families_connected_and_witnessed():
    rng = random.Random(60)
    for _ in range(60):
        fam = rng.choice(("random-ops", "random-pathwidth"))
        k = rng.randrange(1, 4)
        n = rng.randrange(max(2, k + 1), 30)
        spec = GeneratorSpec(fam, n, k, rng.choice((0.0, 0.2, 0.5)))
        g, ir = generate(spec, rng.randrange(10**6))
        assert g.n == n
        assert is_connected(g)
        assert validate(g, ir) is None
        assert width(ir) <= k + 1


def test_determinism():
    rng = random.Random(61)
    for _ in range(20):
        spec = GeneratorSpec("random-ops", rng.randrange(3, 25), rng.randrange(1, 4))
        seed = rng.randrange(10**6)
        g1, ir1 = generate(spec, seed)
        g2, ir2 = generate(spec, seed)
        assert g1.edges == g2.edges and ir1.intervals == ir2.intervals


def test_density_zero_is_tree():
    g, ir = generate(GeneratorSpec("random-ops", 40, 3, 0.0), 7)
    assert len(g.edges) == g.n - 1
    assert brute_force_property(g, "acyclic", limit=g.n)


def test_bad_specs():
    with pytest.raises(GeneratorError):
        generate(GeneratorSpec("moebius", 5), 0)
    with pytest.raises(GeneratorError):
        generate(GeneratorSpec("path", 0), 0)
    with pytest.raises(GeneratorError):
        generate(GeneratorSpec("random-ops", 2, 5), 0)
    assert "path" in FAMILIES
