import math

import pytest

from airpoint import formats
from airpoint.engine import default_config
from airpoint.formats import FormatError
from airpoint.geometry import HandSample, Point3
from airpoint.precision import default_linear, default_nonlinear, segmented
from airpoint.simulate import (
    ControllerPolicy,
    FixedPrecision,
    MotionPrimitive,
    PrimitiveKind,
    TremorModel,
    TwoPhasePrecision,
    add_tremor,
    gen_primitive,
    run_controller,
)
from airpoint.tasks import TaskKind, TaskResult, make_buttons_task, make_erase_task, make_moving_task


def sample_stream(n=50):
    p = MotionPrimitive(
        PrimitiveKind.MIN_JERK, Point3(-0.2, 1.1, 0.4), Point3(0.3, 1.5, 0.6), n / 60.0, 60.0
    )
    return add_tremor(gen_primitive(p, t0=0.5), TremorModel(seed=21))


def example_log():
    task = make_moving_task(TaskKind.HIT_MOVING, speed=700.0)
    cfg = default_config("HR")
    policy = ControllerPolicy(strategy=TwoPhasePrecision(0.1, 0.9, 120.0))
    return run_controller(task, cfg, policy, TremorModel(seed=3), timeout_s=8.0)


class TestConfigRoundTrip:
    @pytest.mark.parametrize("tech", ["VA", "VR", "HA", "HR"])
    def test_identity(self, tech):
        cfg = default_config(tech)
        assert formats.load_config(formats.dump_config(cfg)) == cfg

    def test_identity_with_all_scheme_kinds(self):
        for scheme in (segmented([(0.0, 2.0), (0.5, 8.0)]), default_linear(), default_nonlinear()):
            cfg = default_config("VR", scheme=scheme)
            assert formats.load_config(formats.dump_config(cfg)) == cfg

    def test_hash_is_stable_and_sensitive(self):
        a = default_config("HA")
        b = default_config("HA")
        c = default_config("HA", gain_base=1500.0)
        assert formats.config_hash(a) == formats.config_hash(b)
        assert formats.config_hash(a) != formats.config_hash(c)
        assert len(formats.config_hash(a)) == 12

    def test_rejects_wrong_format_tag(self):
        text = formats.dump_config(default_config("VA")).replace("airpoint-config/1", "bogus/9")
        with pytest.raises(FormatError):
            formats.load_config(text)


class TestTaskRoundTrip:
    def test_all_kinds(self):
        for spec in (
            make_buttons_task(),
            make_erase_task(),
            make_moving_task(TaskKind.HIT_MOVING),
            make_moving_task(TaskKind.TRACK_MOVING),
        ):
            assert formats.load_task(formats.dump_task(spec)) == spec


class TestPolicyRoundTrip:
    def test_both_strategies(self):
        tremor = TremorModel(amplitude=0.0015, band=(7.0, 13.0))
        for strat in (FixedPrecision(0.3), TwoPhasePrecision(0.1, 0.9, 100.0)):
            p = ControllerPolicy(approach_gain=0.4, correction_gain=0.15, strategy=strat, stop_radius_px=3.0)
            p2, t2 = formats.load_policy(formats.dump_policy(p, tremor))
            assert p2 == p
            assert t2.amplitude == tremor.amplitude and t2.band == tremor.band


class TestResultRoundTrip:
    def test_complete_and_incomplete(self):
        for res in (
            TaskResult("minimal_error", "px", (1.25, 3.5, None, 2.0), None, False),
            TaskResult("total_time", "ms", (1500.0, 2500.0), 4000.0, True),
        ):
            assert formats.load_result(formats.dump_result(res)) == res


class TestSamplesFormat:
    def test_round_trip_after_quantization(self):
        samples = sample_stream()
        text = formats.dump_samples(samples)
        parsed = formats.load_samples(text)
        assert len(parsed) == len(samples)
        # identity on the format's own value lattice
        assert formats.dump_samples(parsed) == text
        assert formats.load_samples(formats.dump_samples(parsed)) == parsed

    def test_nine_significant_digits(self):
        s = [HandSample(0.123456789123, Point3(1.0 / 3.0, 1.2, 0.4), Point3(0.0, 1.4, 0.0))]
        text = formats.dump_samples(s)
        assert "0.123456789" in text
        assert "0.333333333" in text

    def test_rejects_non_monotonic(self):
        good = formats.dump_samples(sample_stream(5))
        lines = good.splitlines()
        lines.insert(2, lines[2])  # duplicate timestamp, reported on its 2nd copy
        with pytest.raises(FormatError, match="line 4"):
            formats.load_samples("\n".join(lines))

    def test_rejects_malformed_with_line_number(self):
        text = formats.dump_samples(sample_stream(3))  # header + 4 records
        with pytest.raises(FormatError, match="line 6"):
            formats.load_samples(text + "not a record\n")

    def test_rejects_hand_on_shoulder(self):
        text = f"{formats.SAMPLES_HEADER}\n0.1 0 1.4 0 0 1.4 0\n"
        with pytest.raises(FormatError, match="shoulder"):
            formats.load_samples(text)

    def test_empty_stream(self):
        assert formats.load_samples(formats.SAMPLES_HEADER + "\n") == []


class TestLogFormat:
    def test_round_trip_identity_on_produced_logs(self):
        log = example_log()
        qlog = formats.quantize_log(log)
        text = formats.dump_log(qlog)
        again = formats.load_log(text)
        assert again.frames == qlog.frames
        assert again.markers == qlog.markers
        assert again.config_hash == qlog.config_hash
        assert again.technique == qlog.technique
        assert formats.dump_log(again) == text

    def test_quantization_is_idempotent(self):
        log = example_log()
        once = formats.quantize_log(log)
        twice = formats.quantize_log(once)
        assert once.frames == twice.frames and once.markers == twice.markers

    def test_rings_survive_round_trip(self):
        log = example_log()
        ringed = [f for f in log.frames if f.feedback.rings is not None]
        assert ringed, "need at least one fast frame for this test"
        back = formats.load_log(formats.dump_log(log))
        ringed2 = [f for f in back.frames if f.feedback.rings is not None]
        assert len(ringed) == len(ringed2)

    def test_header_errors(self):
        with pytest.raises(FormatError):
            formats.load_log("junk\n")
        with pytest.raises(FormatError):
            formats.load_log("#airpoint-log 1 only_hash\n")

    def test_record_errors_carry_line_numbers(self):
        log = example_log()
        text = formats.dump_log(log)
        lines = text.splitlines()
        lines.insert(3, "X bad record")
        with pytest.raises(FormatError, match="line 4"):
            formats.load_log("\n".join(lines))


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        p = tmp_path / "out" / "file.txt"
        formats.write_atomic(str(p), "one\n")
        formats.write_atomic(str(p), "two\n")
        assert p.read_text() == "two\n"
        assert list(p.parent.iterdir()) == [p]  # no temp files left behind


class TestManifest:
    def test_load_resolves_relative_paths(self, tmp_path):
        from airpoint.cli import main

        assert main(["gen-fixtures", str(tmp_path)]) == 0
        m = formats.load_manifest(str(tmp_path / "demo.json"))
        assert m.config_path == str(tmp_path / "config_ha.json")
        assert m.seeds == (1,)
        cfg, task, policy, tremor = m.load()
        assert cfg.name == "HA"

    def test_missing_referenced_file(self, tmp_path):
        from airpoint.cli import main

        assert main(["gen-fixtures", str(tmp_path)]) == 0
        (tmp_path / "task1_buttons.json").unlink()
        with pytest.raises(FormatError, match="task1_buttons.json"):
            formats.load_manifest(str(tmp_path / "demo.json"))
