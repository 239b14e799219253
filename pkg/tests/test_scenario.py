import textwrap

import numpy as np
import pytest

from satcon.graph import Graph, GraphSchedule, laplacian, left_eigenvector, weights_at
from satcon.scenario import (
    ExplicitInit,
    RandomGraphSpec,
    RandomLevels,
    ScenarioError,
    builtin,
    builtin_scenarios,
    format_scenario,
    parse_scenario,
)

MINIMAL = """
[scenario]
name = pair

[graph]
n = 2
edge = 1 2 1.0

[saturation]
level = 1

[initial]
values = 0.5 -0.25
"""

FIG7_DOC = """
# four agents, three single-edge graphs per 10 s period
[scenario]
name = switching
model = single

[schedule]
n = 4
period = 10

[segment]
start = 0
end = 3
edge = 1 2 3 1 0

[segment]
start = 3
end = 6
edge = 1 3 2 0 -1

[segment]
start = 6
end = 10
edge = 2 4 1.5 -1 0

[saturation]
levels = 1 2 3 4

[initial]
uniform = -10 10
seed = 8
target_mean = -0.75

[sim]
dt = 0.001
t_end = 400
"""


def doc(text):
    return textwrap.dedent(text)


class TestParse:
    def test_minimal_defaults(self):
        s = parse_scenario(MINIMAL)
        assert s.name == "pair" and s.model == "single"
        assert isinstance(s.network, Graph) and s.network.weights[1, 0] == 1.0
        assert s.initial == ExplicitInit((0.5, -0.25), None)
        assert s.sim.dt == 1e-3 and s.sim.method == "rk4"
        assert s.tol == 1e-3 and s.window == 0.1

    def test_fig7_schedule(self):
        s = parse_scenario(FIG7_DOC)
        assert isinstance(s.network, GraphSchedule)
        assert len(s.network.segments) == 3 and s.network.period == 10.0
        w = weights_at(s.network, 0.0)
        assert w[0, 1] == w[1, 0] == 3.0
        assert s.resolve_saturation().levels.tolist() == [1, 2, 3, 4]
        assert np.mean(s.resolve_initial()) == pytest.approx(-0.75, abs=1e-12)

    def test_random_graph_and_levels(self):
        s = parse_scenario(doc("""
            [scenario]
            name = big
            [random_graph]
            n = 12
            edge_prob = 0.3
            weight_range = 0.5 2
            seed = 4
            [saturation]
            uniform = 1 7
            seed = 3
            [initial]
            uniform = -10 10
            seed = 1
        """))
        assert s.network == RandomGraphSpec(12, 0.3, (0.5, 2.0), 4, False)
        assert s.saturation == RandomLevels(1.0, 7.0, 3)
        levels = s.resolve_saturation().levels
        assert levels.min() == 1.0 and levels.max() <= 7.0

    def test_double_model(self):
        s = parse_scenario(doc("""
            [scenario]
            model = double
            [graph]
            n = 2
            edge = 1 2 1
            [saturation]
            level = 1
            [initial]
            positions = 0 1
            velocities = 2 0
        """))
        np.testing.assert_array_equal(s.resolve_initial(), [0, 1, 2, 0])

    def test_directed_target_uses_left_eigenvector(self):
        s = parse_scenario(doc("""
            [scenario]
            name = d
            [graph]
            n = 3
            directed = true
            edge = 1 2 1
            edge = 2 3 2
            edge = 3 1 1
            [saturation]
            level = 1
            [initial]
            uniform = -5 5
            target_mean = 0.3
        """))
        x = s.resolve_initial()
        assert left_eigenvector(s.network) @ x == pytest.approx(0.3, abs=1e-12)

    def test_comments_and_blank_lines(self):
        text = MINIMAL.replace("level = 1", "level = 1   # trailing comment\n\n# full-line comment")
        assert parse_scenario(text).saturation == 1.0


def error_of(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(doc(text))
    return info.value


class TestParseErrors:
    def test_zero_level_names_field(self):
        err = error_of(MINIMAL.replace("level = 1", "level = 0"))
        assert "'level'" in str(err) and err.line == 10

    def test_zero_in_levels(self):
        err = error_of(MINIMAL.replace("level = 1", "levels = 1 0"))
        assert "'levels'" in str(err) and "positive" in str(err)

    def test_unknown_key(self):
        err = error_of(MINIMAL.replace("n = 2", "n = 2\ncolour = red"))
        assert "unknown key 'colour'" in str(err) and err.line == 7

    def test_unknown_section(self):
        assert "unknown section" in str(error_of(MINIMAL + "\n[plot]\n"))

    def test_dimension_mismatch(self):
        err = error_of(MINIMAL.replace("values = 0.5 -0.25", "values = 0.5 -0.25 3"))
        assert "3 entries for 2 agents" in str(err)

    def test_overlapping_segments(self):
        err = error_of(FIG7_DOC.replace("start = 3\n", "start = 2\n"))
        assert "overlaps" in str(err)

    def test_gap_between_segments(self):
        err = error_of(FIG7_DOC.replace("start = 6\n", "start = 7\n"))
        assert "gap" in str(err)

    def test_negative_weight_fn(self):
        err = error_of(FIG7_DOC.replace("edge = 1 2 3 1 0", "edge = 1 2 1 3 0"))
        assert "negative" in str(err)

    def test_node_out_of_range(self):
        assert "outside 1..2" in str(error_of(MINIMAL.replace("edge = 1 2 1.0", "edge = 1 3 1.0")))

    def test_two_network_sources(self):
        err = error_of(MINIMAL + "\n[random_graph]\nn = 2\nedge_prob = 0.5\n")
        assert "exactly one of" in str(err)

    def test_missing_initial(self):
        assert "missing [initial]" in str(error_of(MINIMAL.split("[initial]")[0]))

    def test_duplicate_key(self):
        assert "duplicate key" in str(error_of(MINIMAL.replace("level = 1", "level = 1\nlevel = 2")))

    def test_bad_number(self):
        assert "expects numbers" in str(error_of(MINIMAL.replace("level = 1", "level = one")))

    def test_bad_sim(self):
        assert "dt" in str(error_of(MINIMAL + "\n[sim]\ndt = -1\n"))

    def test_double_without_velocities(self):
        err = error_of(MINIMAL.replace("name = pair", "name = pair\nmodel = double").replace("values", "positions"))
        assert "velocities" in str(err)

    def test_messages_are_distinct(self):
        texts = [
            MINIMAL.replace("level = 1", "level = 0"),
            MINIMAL.replace("n = 2", "n = 2\ncolour = red"),
            MINIMAL.replace("values = 0.5 -0.25", "values = 0.5"),
            FIG7_DOC.replace("start = 3\n", "start = 2\n"),
        ]
        messages = {str(error_of(t)) for t in texts}
        assert len(messages) == len(texts)


class TestFormat:
    @pytest.mark.parametrize("name", [s.name for s in builtin_scenarios()])
    def test_builtins_round_trip(self, name):
        text = format_scenario(builtin(name))
        again = format_scenario(parse_scenario(text))
        assert again == text

    def test_explicit_round_trip(self):
        text = format_scenario(parse_scenario(MINIMAL))
        assert parse_scenario(text).initial == ExplicitInit((0.5, -0.25), None)


class TestBuiltins:
    def test_names(self):
        names = [s.name for s in builtin_scenarios()]
        assert names == ["fig2a", "fig2b", "fig3a", "fig3b", "fig8a", "fig8b", "fig9a", "fig9b",
                         "fig5", "fig6", "fig11a", "fig11b"]

    def test_fig11a_laplacian(self, fig10_laplacian):
        np.testing.assert_array_equal(laplacian(builtin("fig11a").resolve_network()), fig10_laplacian)

    def test_fig8a_weights(self):
        assert weights_at(builtin("fig8a").resolve_network(), 0.0)[0, 1] == 3.0

    def test_fig2a_mean(self):
        x0 = builtin("fig2a").resolve_initial()
        assert x0.size == 50 and np.mean(x0) == pytest.approx(-0.9821, abs=1e-12)

    def test_fig3_levels(self):
        sat = builtin("fig3a").resolve_saturation()
        assert sat.min_level == 1.0 and sat.levels.max() <= 7.0 and not sat.homogeneous()

    def test_fig9_levels(self):
        assert builtin("fig9b").resolve_saturation().levels.tolist() == [1, 2, 3, 4]

    def test_fig5_velocity_mean(self):
        z = builtin("fig5").resolve_initial()
        assert z.size == 20 and np.mean(z[10:]) == pytest.approx(-0.85, abs=1e-12)

    def test_unknown(self):
        with pytest.raises(KeyError):
            builtin("fig99")


class TestOverrides:
    def test_seed_reaches_every_source(self):
        s = builtin("fig3a").with_overrides(seed=77)
        assert s.network.seed == 77 and s.saturation.seed == 77 and s.initial.seed == 77

    def test_dt_and_t_end(self):
        s = builtin("fig8a").with_overrides(dt=0.01, t_end=5)
        assert s.sim.dt == 0.01 and s.sim.t_end == 5
