from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dfo.benchmarks import rosenbrock
from dfo.core import (
    Candidate,
    Evaluator,
    InvalidConfig,
    Population,
    RandomStream,
    SearchSpace,
    StopCriteria,
    UnsupportedSpace,
    sample_uniform,
)
from dfo.sce import (
    SceConfig,
    bounding_box,
    cce_evolve,
    cce_sampling_probs,
    centroid,
    contract,
    partition_complexes,
    reflect,
    sce_run,
)

from conftest import assert_trace_consistent, sphere


def _sorted_pop(losses):
    return Population([Candidate(np.array([float(l)]), float(l)) for l in losses]).sort()


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(num_complexes=0), dict(cce_parents=1), dict(cce_parents=6),
                                    dict(cce_offspring_rounds=0), dict(cce_evolution_rounds=0)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            SceConfig(**kw)

    def test_complex_size_vs_dim(self):
        with pytest.raises(InvalidConfig):
            SceConfig(complex_size=5).check_space(SearchSpace.box(0, 1, 5))
        SceConfig(complex_size=5).check_space(SearchSpace.box(0, 1, 4))

    def test_binary_unsupported(self):
        with pytest.raises(UnsupportedSpace):
            SceConfig().check_space(SearchSpace.binary(2))

    def test_sample_size(self):
        assert SceConfig(num_complexes=3, complex_size=7).sample_size == 21


class TestPartition:
    def test_single_complex(self):
        pop = _sorted_pop([1, 2, 3, 4])
        (cx,) = partition_complexes(pop, 1, 4)
        assert cx.losses().tolist() == [1, 2, 3, 4]

    def test_round_robin(self):
        a, b = partition_complexes(_sorted_pop([1, 2, 3, 4]), 2, 2)
        assert a.losses().tolist() == [1, 3] and b.losses().tolist() == [2, 4]

    @given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**32))
    def test_partition_is_multiset_split(self, p, m, seed):
        losses = np.random.default_rng(seed).integers(0, 5, p * m)
        pop = _sorted_pop(losses)
        complexes = partition_complexes(pop, p, m)
        assert len(complexes) == p and all(len(c) == m for c in complexes)
        merged = sorted(l for c in complexes for l in c.losses())
        assert merged == sorted(losses.tolist())
        assert all(np.all(np.diff(c.losses()) >= 0) for c in complexes)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            partition_complexes(_sorted_pop([1, 2, 3]), 2, 2)


class TestSamplingProbs:
    def test_m3(self):
        np.testing.assert_allclose(cce_sampling_probs(3), [1 / 2, 1 / 3, 1 / 6], rtol=0, atol=1e-12)

    @given(st.integers(1, 500))
    def test_endpoints_and_sum(self, m):
        p = cce_sampling_probs(m)
        exact = [Fraction(2 * (m + 1 - i), m * (m + 1)) for i in range(1, m + 1)]
        assert sum(exact) == 1
        np.testing.assert_allclose(p, [float(x) for x in exact], rtol=0, atol=1e-12)
        assert abs(p[0] - 2 / (m + 1)) < 1e-12 and abs(p[-1] - 2 / (m * (m + 1))) < 1e-12
        assert abs(p.sum() - 1) < 1e-12
        assert np.all(np.diff(p) < 0)

    def test_m1(self):
        assert cce_sampling_probs(1).tolist() == [1.0]


class TestGeometry:
    def test_centroid(self):
        u = np.array([[0.0, 0.0], [2.0, 0.0], [9.0, 9.0]])
        np.testing.assert_array_equal(centroid(u), [1.0, 0.0])

    def test_reflect_contract(self):
        g, worst = np.array([1.0, 0.0]), np.array([3.0, 4.0])
        np.testing.assert_array_equal(reflect(g, worst), [-1.0, -4.0])
        np.testing.assert_array_equal(contract(g, worst), [2.0, 2.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
           st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
    def test_reflection_identity(self, g, u):
        g, u = np.array(g), np.array(u)
        np.testing.assert_allclose((reflect(g, u) + u) / 2, g, rtol=0, atol=1e-12 * (1 + np.abs(g).max() + np.abs(u).max()))

    @given(st.integers(0, 2**32), st.integers(1, 3), st.integers(1, 6))
    def test_bounding_box_is_tight(self, seed, d, n):
        pts = np.random.default_rng(seed).normal(size=(n, d))
        lo, hi = bounding_box(pts)
        assert np.all(pts >= lo) and np.all(pts <= hi)
        for j in range(d):
            # shrinking any face by a hair excludes a member
            for face, sign in ((lo, 1), (hi, -1)):
                shrunk = face.copy()
                shrunk[j] += sign * 1e-9 * max(1.0, abs(face[j]))
                if sign == 1:
                    assert np.any(pts[:, j] < shrunk[j])
                else:
                    assert np.any(pts[:, j] > shrunk[j])


def _complex(space, m, seed):
    rng = RandomStream(seed)
    ev = Evaluator(sphere, StopCriteria())
    cx = Population([ev(sample_uniform(space, rng)) for _ in range(m)]).sort()
    return cx, ev, rng


class TestCceEvolve:
    def test_size_sorted_and_accounting(self):
        space = SearchSpace.box(-2, 2, 2)
        cfg = SceConfig(complex_size=5, cce_parents=3, cce_offspring_rounds=3, cce_evolution_rounds=4)
        cx, ev, rng = _complex(space, 5, 1)
        before = ev.evals
        cce_evolve(cx, cfg, space, ev, rng)
        assert len(cx) == 5 and cx.sorted and np.all(np.diff(cx.losses()) >= 0)
        # each internal round spends one to three probes
        spent = ev.evals - before
        assert 12 <= spent <= 36
        for c in cx:
            assert c.loss == sphere(c.values)

    @given(st.integers(0, 2**32))
    def test_worst_parent_monotone_unless_mutated(self, seed):
        # wrapping the evaluator records each internal round's outcome
        space = SearchSpace.box(-2, 2, 2)
        cfg = SceConfig(complex_size=4, cce_parents=3, cce_offspring_rounds=1, cce_evolution_rounds=1)
        cx, ev, rng = _complex(space, 4, seed)
        worst_before = max(cx.losses()[:])
        probes = []

        def spy(c):
            out = ev(c)
            probes.append(out.loss)
            return out

        best_before = cx[0].loss
        cce_evolve(cx, cfg, space, spy, rng)
        assert 1 <= len(probes) <= 3
        if len(probes) < 3:
            # accepted reflection or contraction: strictly better than the replaced point
            assert probes[-1] < worst_before
        assert cx[0].loss <= best_before

    def test_mutation_point_inside_hypercube(self):
        # an objective that rejects everything forces the random replacement every round
        space = SearchSpace.box(-5, 5, 2)
        cfg = SceConfig(complex_size=4, cce_parents=2, cce_offspring_rounds=1, cce_evolution_rounds=1)
        rng = RandomStream(9)
        pts = [np.array([0.0, 0.0]), np.array([1.0, 0.5]), np.array([0.2, 2.0]), np.array([0.7, 1.0])]
        cx = Population([Candidate(p, float(i)) for i, p in enumerate(pts)]).sort()
        lo, hi = bounding_box(np.array(pts))
        seen = []

        def worse(c):
            c.loss = 100.0
            seen.append(c.values.copy())
            return c

        cce_evolve(cx, cfg, space, worse, rng)
        assert len(seen) == 3
        z = seen[-1]
        assert np.all(z >= lo) and np.all(z <= hi)
        # the random point is accepted unconditionally
        assert any(np.array_equal(c.values, z) for c in cx)


class TestRun:
    def test_rosenbrock_fixture(self):
        cfg = SceConfig(num_complexes=2, complex_size=5, cce_parents=3, cce_offspring_rounds=2, cce_evolution_rounds=2)
        trace = sce_run(rosenbrock, SearchSpace.box(-2.048, 2.048, 2), cfg,
                        StopCriteria(max_evals=50000, target_loss=1e-6), RandomStream(1))
        assert trace.best.loss <= 1e-6
        assert_trace_consistent(trace)

    def test_single_complex_matches_cce(self):
        space = SearchSpace.box(-2, 2, 2)
        cfg = SceConfig(num_complexes=1, complex_size=6, cce_parents=3, cce_offspring_rounds=2, cce_evolution_rounds=2)
        got = []
        sce_run(sphere, space, cfg, StopCriteria(max_iters=4), RandomStream(5),
                callback=lambda pop: got.append(pop.matrix().copy()))
        rng = RandomStream(5)
        ev = Evaluator(sphere, StopCriteria())
        pop = Population([sample_uniform(space, rng) for _ in range(6)])
        ev.evaluate_all(pop)
        pop.sort()
        for snapshot in got:
            pop = cce_evolve(pop, cfg, space, ev, rng)
            np.testing.assert_array_equal(pop.matrix(), snapshot)

    @given(st.integers(0, 2**32))
    def test_population_size_invariant(self, seed):
        cfg = SceConfig(num_complexes=3, complex_size=4, cce_parents=2)
        sizes = []
        trace = sce_run(sphere, SearchSpace.box(-1, 1, 3), cfg, StopCriteria(max_iters=5), RandomStream(seed),
                        callback=lambda pop: sizes.append(len(pop)))
        assert sizes == [12] * 5
        assert_trace_consistent(trace)
