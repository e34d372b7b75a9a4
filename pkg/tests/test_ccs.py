import math

import numpy as np
import pytest

from morlkit.ccs import (
    MarginalWeightQueue,
    PartialCcs,
    aols,
    corner_weights,
    is_convex_undominated,
    optimistic_bound,
    relative_improvement,
    scalarized_max,
    write_history_csv,
)
from morlkit.core import ValueVector, WeightVector, scalarize, simplex_extrema
from morlkit.envs import random_tabular_momdp, value_iteration


def vv(*xs):
    return ValueVector(tuple(float(x) for x in xs))


def wv(*xs):
    return WeightVector(tuple(float(x) for x in xs))


def grid_weights_2d(points=10_001):
    return [wv(t, 1.0 - t) for t in np.linspace(0.0, 1.0, points)]


def grid_undominated_oracle(v, s, points=10_001):
    """Brute force: does some grid weight make v strictly the best?"""
    for w in grid_weights_2d(points):
        target = scalarize(w, v)
        if all(target > scalarize(w, other) + 1e-12 for other in s):
            return True
    return False


class TestScalarizedMax:
    def test_singleton(self):
        value, arg = scalarized_max([vv(1, 0)], wv(0.3, 0.7))
        assert value == pytest.approx(0.3)
        assert arg.values == (1.0, 0.0)

    def test_symmetric_tie_lowest_index(self):
        value, arg = scalarized_max([vv(1, 0), vv(0, 1)], wv(0.5, 0.5))
        assert value == pytest.approx(0.5)
        assert arg.values == (1.0, 0.0)

    def test_exhaustive_dot_product(self):
        # Oracle: compute both dots by hand; 0.25*3+0.75*1 = 1.5 < 0.25+3 = 3.25.
        value, arg = scalarized_max([vv(3, 1), vv(1, 4)], wv(0.25, 0.75))
        assert value == pytest.approx(3.25)
        assert arg.values == (1.0, 4.0)

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            scalarized_max([], wv(1.0))


class TestIsConvexUndominated:
    def test_empty_set_vacuous(self):
        assert is_convex_undominated(vv(0, 0), [])

    def test_componentwise_dominated(self):
        assert not is_convex_undominated(vv(0, 0), [vv(1, 1)])

    def test_below_segment_matches_grid_oracle(self):
        v = vv(1.5, 1.5)
        s = [vv(3, 0), vv(0, 3)]
        assert grid_undominated_oracle(v, s) is False
        assert is_convex_undominated(v, s) is False

    def test_vertex_matches_grid_oracle(self):
        v = vv(3, 1)
        s = [vv(1, 4), vv(0, 0)]
        assert grid_undominated_oracle(v, s) is True
        assert is_convex_undominated(v, s) is True

    def test_random_agreement_with_grid_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            s = [vv(*rng.uniform(-2, 2, 2)) for _ in range(rng.integers(1, 5))]
            v = vv(*rng.uniform(-2, 2, 2))
            assert is_convex_undominated(v, s) == grid_undominated_oracle(v, s)

    def test_margin_variant(self):
        # v beats the set by at least 0.5 at e1 but not by 2.
        v = vv(3, 0)
        s = [vv(2, 0)]
        assert is_convex_undominated(v, s, margin=0.5)
        assert not is_convex_undominated(v, s, margin=2.0)


class TestCornerWeights:
    def test_singleton_yields_extrema(self):
        corners = corner_weights([vv(2, 5, 1)])
        assert sorted(c.weights for c in corners) == [
            (0.0, 0.0, 1.0),
            (0.0, 1.0, 0.0),
            (1.0, 0.0, 0.0),
        ]

    def test_two_vector_crossing(self):
        # Oracle: solve 3w + (1-w) = w + 4(1-w) analytically -> w = 3/5.
        corners = corner_weights([vv(3, 1), vv(1, 4)])
        weights = sorted(c.weights for c in corners)
        assert len(weights) == 3
        assert weights[1][0] == pytest.approx(0.6, abs=1e-9)

    def test_dominated_vector_changes_nothing(self):
        s = [vv(3, 1), vv(1, 4)]
        s_extra = s + [vv(2, 0)]  # strictly below (3, 1)
        a = sorted(c.weights for c in corner_weights(s))
        b = sorted(c.weights for c in corner_weights(s_extra))
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert max(abs(p - q) for p, q in zip(x, y)) <= 1e-9
        # Oracle: dense-grid envelope agrees with and without the extra vector.
        for w in grid_weights_2d(2001):
            env_a = max(scalarize(w, v) for v in s)
            env_b = max(scalarize(w, v) for v in s_extra)
            assert env_a == pytest.approx(env_b, abs=1e-12)

    def test_corners_match_grid_envelope_breakpoints(self):
        # Oracle: every interior corner is where the grid argmax changes.
        rng = np.random.default_rng(3)
        s = [vv(*rng.uniform(0, 3, 2)) for _ in range(5)]
        corners = corner_weights(s)
        grid = grid_weights_2d(100_001)
        argmaxes = [int(np.argmax([scalarize(w, v) for v in s])) for w in grid]
        switches = {
            0.5 * (grid[k][0] + grid[k + 1][0])
            for k in range(len(grid) - 1)
            if argmaxes[k] != argmaxes[k + 1]
        }
        interior = [c[0] for c in corners if 0.0 < c[0] < 1.0]
        assert len(interior) == len(switches)
        for got in interior:
            assert min(abs(got - want) for want in switches) <= 1e-4

    def test_three_objective_corners_on_simplex(self):
        rng = np.random.default_rng(11)
        s = [vv(*rng.uniform(0, 3, 3)) for _ in range(4)]
        corners = corner_weights(s)
        extrema = {e.weights for e in simplex_extrema(3)}
        got = {c.weights for c in corners}
        assert extrema <= got
        for c in corners:
            assert abs(sum(c.weights) - 1.0) <= 1e-9
            assert min(c.weights) >= 0.0


class TestOptimisticBound:
    def test_single_observation_at_same_weight(self):
        w = wv(0.5, 0.5)
        assert optimistic_bound([(w, 2.0)], w, 0.25) == pytest.approx(2.25, abs=1e-9)

    def test_exact_recovery_of_point(self):
        v = vv(3, 4)
        obs = [(e, scalarize(e, v)) for e in simplex_extrema(2)]
        w = wv(0.3, 0.7)
        assert optimistic_bound(obs, w, 0.0) == pytest.approx(scalarize(w, v), abs=1e-9)

    def test_two_observation_corner(self):
        # Oracle: LP vertex u = (3, 4) by hand.
        obs = [(wv(1, 0), 3.0), (wv(0, 1), 4.0)]
        assert optimistic_bound(obs, wv(0.5, 0.5), 0.0) == pytest.approx(3.5, abs=1e-9)

    def test_unbounded_without_extrema(self):
        with pytest.raises(ValueError):
            optimistic_bound([(wv(1, 0), 3.0)], wv(0.5, 0.5), 0.0)

    def test_upper_bound_property(self):
        # Bound dominates the surface value whenever every observation is a
        # genuine envelope query over the same set.
        rng = np.random.default_rng(5)
        for _ in range(20):
            s = [vv(*rng.uniform(-1, 3, 2)) for _ in range(4)]
            obs_weights = list(simplex_extrema(2)) + [
                wv(*(lambda r: (r, 1 - r))(rng.uniform())) for _ in range(5)
            ]
            obs = [(w, scalarized_max(s, w)[0]) for w in obs_weights]
            for _ in range(10):
                w = wv(*(lambda r: (r, 1 - r))(rng.uniform()))
                surface, _ = scalarized_max(s, w)
                assert optimistic_bound(obs, w, 0.0) >= surface - 1e-9


class TestRelativeImprovement:
    def test_converged(self):
        assert relative_improvement(10.0, 10.0) == 0.0

    def test_half(self):
        assert relative_improvement(10.0, 5.0) == pytest.approx(0.5)

    def test_hand_arithmetic(self):
        assert relative_improvement(8.0, 7.6) == pytest.approx(0.05)

    def test_zero_bound_errors(self):
        with pytest.raises(ZeroDivisionError):
            relative_improvement(0.0, 1.0)


class TestMarginalWeightQueue:
    def test_priority_order_and_infinite_first(self):
        q = MarginalWeightQueue()
        q.push(wv(1, 0), 0.5, 1.0)
        q.push(wv(0, 1), math.inf, math.inf)
        q.push(wv(0.5, 0.5), 0.7, 2.0)
        assert q.pop()[0].weights == (0.0, 1.0)
        assert q.pop()[0].weights == (0.5, 0.5)
        assert q.pop()[0].weights == (1.0, 0.0)

    def test_fifo_among_equal(self):
        q = MarginalWeightQueue()
        q.push(wv(1, 0), 1.0, 1.0)
        q.push(wv(0, 1), 1.0, 1.0)
        assert q.pop()[0].weights == (1.0, 0.0)


class TestPartialCcs:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            PartialCcs((vv(1, 2), vv(1, 2)), ())


class TestAols:
    def test_constant_oracle_single_point(self):
        calls = []

        def oracle(w):
            calls.append(w)
            return vv(1.0, -2.0, 0.5)

        result = aols(oracle, 3, 1e-6)
        assert len(result.ccs.vectors) == 1
        assert result.delta_max == 0.0
        assert len(result.explored_weights) == 3
        assert not result.hit_iteration_cap
        assert len(calls) == 3

    def test_exact_tabular_oracle_matches_grid_sweep(self):
        # Oracle: 1001-point weight grid sweep of the same exact solver,
        # filtered for convex dominance.
        rng = np.random.default_rng(123)
        m = random_tabular_momdp(rng, 8, 3, 2, discount=0.9)
        result = aols(lambda w: value_iteration(m, w)[1], 2, 1e-6)
        sweep = []
        for w in grid_weights_2d(1001):
            _, value = value_iteration(m, w)
            if all(np.max(np.abs(value.array - v.array)) > 1e-6 for v in sweep):
                sweep.append(value)
        reference = [
            v
            for k, v in enumerate(sweep)
            if is_convex_undominated(v, sweep[:k] + sweep[k + 1 :])
        ]
        got = sorted(v.values for v in result.ccs.vectors)
        want = sorted(v.values for v in reference)
        assert len(got) == len(want)
        for x, y in zip(got, want):
            assert max(abs(a - b) for a, b in zip(x, y)) <= 1e-6
        assert result.delta_max <= 1e-6

    def test_monotone_surface_growth(self):
        # V_S*(w) never decreases as the set grows, for 100 random weights.
        rng = np.random.default_rng(77)
        m = random_tabular_momdp(rng, 10, 3, 2, discount=0.9)
        result = aols(lambda w: value_iteration(m, w)[1], 2, 1e-6)
        probes = [wv(*(lambda r: (r, 1 - r))(rng.uniform())) for _ in range(100)]
        order = [v for v, it in zip(result.ccs.vectors, range(len(result.ccs.vectors)))]
        inserted = [it.index for it in result.history if it.inserted]
        assert len(inserted) == len(result.ccs.vectors)
        for probe in probes:
            previous = -math.inf
            for k in range(1, len(order) + 1):
                surface, _ = scalarized_max(order[:k], probe)
                assert surface >= previous - 1e-12
                previous = surface

    def test_soundness_every_member_undominated(self):
        rng = np.random.default_rng(42)
        for trial in range(5):
            m = random_tabular_momdp(rng, 6, 3, 2, discount=0.9)
            result = aols(lambda w: value_iteration(m, w)[1], 2, 1e-6)
            vectors = list(result.ccs.vectors)
            for k, v in enumerate(vectors):
                assert is_convex_undominated(v, vectors[:k] + vectors[k + 1 :])

    def test_epsilon_completeness(self):
        # With an exact oracle the surface is epsilon-close to optimal
        # everywhere on a dense grid.
        rng = np.random.default_rng(9)
        m = random_tabular_momdp(rng, 8, 2, 2, discount=0.9)
        epsilon = 1e-6
        result = aols(lambda w: value_iteration(m, w)[1], 2, epsilon)
        for w in grid_weights_2d(501):
            _, true_value = value_iteration(m, w)
            surface, _ = scalarized_max(list(result.ccs.vectors), w)
            assert scalarize(w, true_value) - surface <= epsilon + 1e-9

    def test_treasure_grid_matches_policy_enumeration(self):
        # Oracle: exhaustive open-loop plan enumeration at the grid's horizon
        # (deterministic dynamics and a fixed start make plans equivalent to
        # deterministic policies), filtered for convex dominance.
        from itertools import product

        from morlkit.envs import TreasureGrid, TreasureGridSession, finite_horizon_values, treasure_grid_to_tabular

        grid = TreasureGrid(
            width=3, height=3, treasures=((0, 2, 1.0), (2, 2, 10.0)), horizon=5
        )
        gamma = 0.95
        tabular = treasure_grid_to_tabular(grid, gamma)
        result = aols(
            lambda w: finite_horizon_values(tabular, w, grid.horizon), 2, 1e-6
        )
        rng = np.random.default_rng(0)
        returns: list[np.ndarray] = []
        for plan in product(range(4), repeat=grid.horizon):
            session = TreasureGridSession(grid)
            session.reset(rng)
            total = np.zeros(2)
            for t, action in enumerate(plan):
                _, reward, done = session.step(action, rng)
                total += gamma**t * reward
                if done:
                    break
            if all(np.max(np.abs(total - seen)) > 1e-9 for seen in returns):
                returns.append(total)
        vectors = [vv(*r) for r in returns]
        reference = sorted(
            v.values
            for k, v in enumerate(vectors)
            if is_convex_undominated(v, vectors[:k] + vectors[k + 1 :])
        )
        got = sorted(v.values for v in result.ccs.vectors)
        assert len(got) == len(reference)
        for a, b in zip(got, reference):
            assert max(abs(x - y) for x, y in zip(a, b)) <= 1e-9
        assert result.delta_max <= 1e-6

    def test_iteration_cap_flagged(self):
        rng = np.random.default_rng(1)
        m = random_tabular_momdp(rng, 8, 3, 2, discount=0.9)
        result = aols(lambda w: value_iteration(m, w)[1], 2, 1e-6, max_iterations=2)
        assert result.hit_iteration_cap

    def test_memoizes_oracle_within_call(self):
        seen = {}

        def oracle(w):
            assert w.weights not in seen, "oracle re-queried for the same weight"
            seen[w.weights] = True
            return vv(2.0, 1.0)

        aols(oracle, 2, 1e-3)

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError):
            aols(lambda w: vv(1, 1), 2, 0.0)

    def test_history_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        m = random_tabular_momdp(rng, 6, 2, 2, discount=0.9)
        result = aols(lambda w: value_iteration(m, w)[1], 2, 1e-6)
        path = tmp_path / "history.csv"
        write_history_csv(result, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "iteration,w0,w1,delta_r"
        assert len(lines) == len(result.history) + 1
        last = lines[-1].split(",")
        assert float(last[-1]) == result.history[-1].remaining_delta_r
