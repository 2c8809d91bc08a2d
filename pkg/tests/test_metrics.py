import pytest
from hypothesis import given, settings, strategies as st

from lightattack.agents import make_factory
from lightattack.errors import AsrUndefinedError
from lightattack.metrics import (EpisodeRecord, EvalReport, compute_asr, compute_el,
                                 episode_id, intensity_sweep, random_intensity_baseline)
from lightattack.scene import GoalRegion
from conftest import make_scene, make_spec


def rec(eid, condition, success, length=10, seed=0, rollouts=1):
    return EpisodeRecord(episode_id=eid, condition=condition, success=success,
                         episode_length=length, final_intensity={"mode": "constant", "level": 1.0},
                         rollouts_used=rollouts, seed=seed)


class TestAsr:
    def test_fraction_of_broken_clean_successes(self):
        clean = [rec(f"e{i}", "clean", i < 10) for i in range(12)]
        attacked = [rec(f"e{i}", "sila", i >= 4) for i in range(12)]
        # Clean successes: e0..e9; attacked failures among them: e0..e3.
        assert compute_asr(clean, attacked) == pytest.approx(0.4)

    def test_harmless_attack_scores_zero(self):
        clean = [rec(f"e{i}", "clean", True) for i in range(5)]
        attacked = [rec(f"e{i}", "sila", True) for i in range(5)]
        assert compute_asr(clean, attacked) == 0.0

    def test_total_break_scores_one(self):
        clean = [rec(f"e{i}", "clean", True) for i in range(5)]
        attacked = [rec(f"e{i}", "sila", False) for i in range(5)]
        assert compute_asr(clean, attacked) == 1.0

    def test_clean_failures_do_not_count(self):
        clean = [rec("a", "clean", True), rec("b", "clean", False)]
        attacked = [rec("a", "sila", False), rec("b", "sila", False)]
        assert compute_asr(clean, attacked) == 1.0

    def test_undefined_when_no_clean_success(self):
        clean = [rec("a", "clean", False)]
        attacked = [rec("a", "sila", False)]
        with pytest.raises(AsrUndefinedError):
            compute_asr(clean, attacked)

    def test_pairing_violations_rejected(self):
        clean = [rec("a", "clean", True)]
        with pytest.raises(ValueError):
            compute_asr(clean, [rec("b", "sila", False)])
        with pytest.raises(ValueError):
            compute_asr(clean, [rec("a", "sila", False, seed=99)])
        with pytest.raises(ValueError):
            compute_asr(clean, [])  # missing attacked mate for a clean success

    @settings(max_examples=100)
    @given(successes=st.integers(1, 30), failures=st.integers(0, 30),
           broken=st.data())
    def test_monotone_in_added_breaks(self, successes, failures, broken):
        n = successes + failures
        clean = [rec(f"e{i}", "clean", i < successes) for i in range(n)]
        flags = [broken.draw(st.booleans()) for _ in range(n)]
        attacked = [rec(f"e{i}", "sila", not flags[i]) for i in range(n)]
        base = compute_asr(clean, attacked)
        # Append one fresh clean-success episode broken by the attack.
        clean2 = clean + [rec("extra", "clean", True)]
        attacked2 = attacked + [rec("extra", "sila", False)]
        assert compute_asr(clean2, attacked2) >= base
        assert 0.0 <= base <= 1.0


class TestEl:
    def test_mean_over_all_episodes(self):
        records = [rec("a", "clean", True, length=100), rec("b", "clean", False, length=200)]
        assert compute_el(records) == 150.0

    def test_single_record(self):
        assert compute_el([rec("a", "clean", True, length=7)]) == 7.0

    def test_equal_lengths(self):
        records = [rec(f"e{i}", "clean", True, length=42) for i in range(9)]
        assert compute_el(records) == 42.0

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            compute_el([])


class TestEvalReport:
    def test_asr_requires_clean_success(self):
        with pytest.raises(ValueError):
            EvalReport(task_id="t", n_episodes=1, n_clean_success=0, asr=0.5,
                       el_clean=10.0, el_attack=None)

    def test_undefined_asr_allowed(self):
        report = EvalReport(task_id="t", n_episodes=1, n_clean_success=0, asr=None,
                            el_clean=10.0, el_attack=None)
        assert report.asr is None


class TestRandomIntensityBaseline:
    def test_fixed_seed_reproduces_level(self):
        scene = make_scene(goal=GoalRegion(0.0, 3.0, 0.5))
        factory = make_factory("goal_seeker")
        spec = make_spec(scene)
        a = random_intensity_baseline(scene, factory, spec, seed=5)
        b = random_intensity_baseline(scene, factory, spec, seed=5)
        assert a == b
        assert a.rollouts_used == 1
        assert a.condition == "random_intensity"

    def test_level_within_bounds(self):
        scene = make_scene(goal=GoalRegion(0.0, 3.0, 0.5), bounds=(0.25, 1.25))
        record = random_intensity_baseline(scene, make_factory("goal_seeker"),
                                           make_spec(scene), seed=11)
        assert 0.25 <= record.final_intensity["level"] <= 1.25

    def test_degenerate_width_draws_lower_bound(self):
        # A zero-width interval is not a legal Scene, so exercise the claim
        # through the underlying draw: uniform(a, a) == a.
        import random as pyrandom

        assert pyrandom.Random(3).uniform(0.7, 0.7) == 0.7


class TestSweep:
    def test_identity_profile_gives_flat_curve(self):
        scenes = [make_scene(scene_id=f"s{i}", goal=GoalRegion(0.0, 3.0, 0.5)) for i in range(3)]
        rows = intensity_sweep(scenes, make_factory("goal_seeker"), (0.0, 1.5), 0.5)
        assert len(rows) == 4
        assert len({row.success_rate for row in rows}) == 1

    def test_threshold_band_zeroes_outside(self):
        scenes = [make_scene(scene_id="s", goal=GoalRegion(0.0, 3.0, 0.5), bounds=(0.0, 2.0))]
        factory = make_factory("threshold:0.5:1.5")
        rows = intensity_sweep(scenes, factory, (0.0, 2.0), 0.1)
        assert len(rows) == 21
        for row in rows:
            expected = 1.0 if 0.5 <= row.intensity <= 1.5 else 0.0
            assert row.success_rate == expected

    def test_grid_point_count(self):
        scenes = [make_scene(scene_id="s", goal=GoalRegion(0.0, 3.0, 0.5), bounds=(0.0, 2.0))]
        rows = intensity_sweep(scenes, make_factory("goal_seeker"), (0.0, 2.0), 0.1)
        assert len(rows) == 21
        assert rows[0].intensity == 0.0
        assert rows[-1].intensity == 2.0

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            intensity_sweep([make_scene()], make_factory("goal_seeker"), (0.0, 1.0), 0.0)


class TestEpisodeId:
    def test_format(self):
        assert episode_id("scene_007", 3) == "scene_007#s3"
