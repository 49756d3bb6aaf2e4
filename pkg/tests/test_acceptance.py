"""Acceptance gate: one test per release criterion, each printing a
PASS line with the tolerance it enforced. Run with `pytest -s` (or -rA)
to see the per-criterion lines."""

import json
import math
import random
import statistics
import time

import pytest

from airpoint import formats
from airpoint.cli import main
from airpoint.engine import (
    DisplayGeometry,
    MappedArea,
    PointerEngine,
    default_config,
    rebase_absolute,
)
from airpoint.geometry import HandSample, Point3, Stationary, c_value_hr, c_value_vr
from airpoint import precision as pr
from airpoint.simulate import (
    ControllerPolicy,
    MotionPrimitive,
    PrimitiveKind,
    TremorModel,
    TwoPhasePrecision,
    add_tremor,
    gen_primitive,
    run_controller,
)
from airpoint.tasks import (
    Marker,
    TaskKind,
    TaskSpec,
    Track,
    TrajectoryLog,
    eval_task1,
    eval_task3,
    eval_task4,
    make_buttons_task,
)
from airpoint.tasks import ButtonRun, Rect
from airpoint.engine import FeedbackState, FrameOutput

SHOULDER = Point3(0.0, 1.4, 0.0)


def report(name):
    print(f"\nACCEPTANCE PASS: {name}")


def test_c_value_oracle_equivalence():
    """HR matches a law-of-cosines vector oracle and VR matches the
    component/norm oracle to 1e-9 rad over 1000 random triples, < 1 s."""
    rng = random.Random(2024)
    start = time.perf_counter()
    checked = 0
    while checked < 1000:
        p1 = [rng.uniform(-1, 1) for _ in range(3)]
        p2 = [rng.uniform(-1, 1) for _ in range(3)]
        sh = [rng.uniform(-1, 1) for _ in range(3)]
        try:
            hr = c_value_hr(Point3(*p1), Point3(*p2), Point3(*sh))
            vr = c_value_vr(Point3(*p1), Point3(*p2))
        except Stationary:
            continue
        # vector oracle: angle at the point farther from the shoulder
        far, near = (p1, p2) if math.dist(p1, sh) >= math.dist(p2, sh) else (p2, p1)
        u = [a - b for a, b in zip(near, far)]
        v = [a - b for a, b in zip(sh, far)]
        dot = sum(a * b for a, b in zip(u, v))
        nu, nv = math.hypot(*u), math.hypot(*v)
        want_hr = math.acos(max(-1.0, min(1.0, dot / (nu * nv))))
        assert abs(hr.theta - want_hr) < 1e-9

        d = [a - b for a, b in zip(p2, p1)]
        want_vr = math.acos(max(0.0, min(1.0, abs(d[1]) / math.hypot(*d))))
        assert abs(vr.theta - want_vr) < 1e-9
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"oracle sweep took {elapsed:.2f}s"
    report(f"c-value oracle equivalence (1000 triples, 1e-9 rad, {elapsed * 1000:.0f} ms)")


def test_clutch_invariance_flex_stretch():
    """Flex in along one shoulder ray and stretch out along another: the
    pointer's net displacement is exactly zero."""
    cfg = default_config("HR", smoothing_alpha=1.0)
    eng = PointerEngine(cfg)

    def at(az, el, r):
        return Point3(
            SHOULDER.x + r * math.cos(el) * math.sin(az),
            SHOULDER.y + r * math.sin(el),
            SHOULDER.z + r * math.cos(el) * math.cos(az),
        )

    warm = [HandSample((i + 1) / 60.0, at(0.25, 0.08, 0.5), SHOULDER) for i in range(5)]
    anchor = [eng.step(s) for s in warm][-1].pointer
    n = 25
    flex = [at(0.25, 0.08, 0.5 - 0.32 * (i + 1) / n) for i in range(n)]
    stretch = [at(-0.35, 0.02, 0.18 + 0.4 * (i + 1) / n) for i in range(n)]
    t0 = warm[-1].t
    outs = [
        eng.step(HandSample(t0 + (i + 1) / 60.0, p, SHOULDER))
        for i, p in enumerate(flex + stretch)
    ]
    assert all(o.frozen for o in outs), "maneuver must stay frozen throughout"
    assert outs[-1].pointer == anchor, "net pointer displacement must be exactly zero"
    report("clutch invariance: flex-then-stretch yields exactly zero net displacement")


def test_rebase_continuity_random_events():
    """10^4 random precision changes: unclamped rebases keep the pointer
    to 1e-6 px; clamped rebases keep it inside the new area."""
    display = DisplayGeometry(3840, 1080)
    rng = random.Random(77)
    clamped_count = 0
    for _ in range(10000):
        uv = (rng.random(), rng.random())
        pointer = (rng.uniform(0, 3840), rng.uniform(0, 1080))
        h_new = rng.uniform(1.0, 20.0)
        area = MappedArea((0.0, 0.0), (3840.0, 1080.0))
        new = rebase_absolute(area, uv, pointer, h_new, display)
        raw = (pointer[0] - uv[0] * new.size[0], pointer[1] - uv[1] * new.size[1])
        if new.origin == raw:
            after = new.at(uv)
            assert abs(after[0] - pointer[0]) < 1e-6
            assert abs(after[1] - pointer[1]) < 1e-6
        else:
            clamped_count += 1
            assert new.contains(new.at(uv))
    assert clamped_count > 100, "sweep should exercise the clamped branch"
    report(f"rebase continuity: 10^4 events, 1e-6 px unclamped, {clamped_count} clamped all in-area")


def test_precision_schemes():
    """Segmented returns exact band constants, linear midpoint exact,
    nonlinear passes knots to 1e-12 and is monotone on 100 random sets."""
    seg = pr.segmented([(0.0, 1.0), (1.0 / 3.0, 4.0), (2.0 / 3.0, 16.0)])
    assert pr.eval_scheme(seg, 0.0).H == 1.0
    assert pr.eval_scheme(seg, 0.5).H == 4.0
    assert pr.eval_scheme(seg, 1.0).H == 16.0

    lin = pr.linear((0.0, 1.0), (1.0, 10.0))
    assert pr.eval_scheme(lin, 0.5).H == 5.5

    rng = random.Random(31337)
    for _ in range(100):
        n = rng.randint(3, 9)
        hs = sorted(rng.uniform(0, 1) for _ in range(n))
        while min(b - a for a, b in zip(hs, hs[1:])) < 1e-3:
            hs = sorted(rng.uniform(0, 1) for _ in range(n))
        H = rng.uniform(0.5, 2.0)
        Hs = []
        for _ in range(n):
            Hs.append(H)
            H += rng.uniform(0.0, 6.0)
        scheme = pr.nonlinear(list(zip(hs, Hs)))
        for h, want in zip(hs, Hs):
            assert abs(pr.eval_scheme(scheme, h).H - want) < 1e-12
        grid = [hs[0] + (hs[-1] - hs[0]) * i / 200 for i in range(201)]
        vals = [pr.eval_scheme(scheme, h).H for h in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    report("precision schemes: segmented/linear exact, nonlinear knots 1e-12 + monotone x100")


def test_jitter_attenuation_ordering():
    """2 mm RMS tremor through a relative technique: mean pointer-jitter
    RMS strictly decreases from H=1 to H=4 to H=16 over 10 seeds."""
    h_centers = {1.0: 1.0 / 6.0, 4.0: 0.5, 16.0: 5.0 / 6.0}
    means = {}
    for H, hc in h_centers.items():
        vals = []
        for seed in range(10):
            cfg = default_config("VR")
            y_lo, y_hi = cfg.volume.vertical_range
            y = y_lo + hc * (y_hi - y_lo)
            hold = MotionPrimitive(
                PrimitiveKind.HOLD, Point3(0.0, y, 0.5), Point3(0.0, y, 0.5), 5.0, 60.0
            )
            samples = add_tremor(gen_primitive(hold, t0=0.1), TremorModel(amplitude=0.002, seed=seed))
            eng = PointerEngine(cfg)
            outs = [eng.step(s) for s in samples]
            steps = [math.dist(b.pointer, a.pointer) for a, b in zip(outs, outs[1:])]
            vals.append(math.sqrt(sum(d * d for d in steps) / len(steps)))
        means[H] = statistics.mean(vals)
    assert means[16.0] < means[4.0] < means[1.0]
    report(
        "jitter attenuation: RMS means strictly ordered "
        f"H16 {means[16.0]:.3f} < H4 {means[4.0]:.3f} < H1 {means[1.0]:.3f} px"
    )


def test_directional_task3_reproduction(tmp_path):
    """cmd_compare on the TASK3 fixture: TwoPhase HA and HR beat the
    fixed-coarse baseline in at least 9 of 10 seeds, in under 30 s."""
    start = time.perf_counter()
    fx = tmp_path / "fx"
    assert main(["gen-fixtures", str(fx)]) == 0
    out = tmp_path / "compare.json"
    code = main(
        [
            "compare",
            str(fx / "compare_task3_ha.json"),
            str(fx / "compare_task3_hr.json"),
            str(fx / "compare_task3_baseline.json"),
            "-o",
            str(out),
        ]
    )
    assert code == 0
    table = json.loads(out.read_text())
    cols = {c["technique"]: c["per_seed"] for c in table["columns"]}
    ha, hr, km = cols["HA"], cols["HR"], cols["KM"]
    assert all(v is not None for v in ha + hr + km)
    ha_wins = sum(a < k for a, k in zip(ha, km))
    hr_wins = sum(r < k for r, k in zip(hr, km))
    elapsed = time.perf_counter() - start
    assert ha_wins >= 9, f"HA beat baseline in only {ha_wins}/10 seeds"
    assert hr_wins >= 9, f"HR beat baseline in only {hr_wins}/10 seeds"
    assert elapsed < 30.0, f"comparison took {elapsed:.1f}s"
    report(
        f"directional TASK3: HA {ha_wins}/10 and HR {hr_wins}/10 seeds below baseline ({elapsed:.1f}s)"
    )


def test_determinism_and_round_trip(tmp_path):
    """Identical manifests give byte-identical logs; parse-serialize is
    the identity on every file format."""
    fx = tmp_path / "fx"
    assert main(["gen-fixtures", str(fx)]) == 0
    manifest = fx / "quick.json"
    formats.write_atomic(
        str(manifest),
        formats.dump_manifest(
            formats.RunManifest("config_hr.json", "task3_hit.json", "policy_two_phase_mid.json", (5,), "runs/q")
        ),
    )
    assert main(["simulate", str(manifest)]) == 0
    first = (fx / "runs" / "q" / "log_s5.txt").read_bytes()
    assert main(["simulate", str(manifest)]) == 0
    second = (fx / "runs" / "q" / "log_s5.txt").read_bytes()
    assert first == second

    # parse-serialize identity across formats
    for name in ("config_ha.json", "config_baseline.json"):
        cfg = formats.load_config((fx / name).read_text())
        assert formats.load_config(formats.dump_config(cfg)) == cfg
    for name in ("task1_buttons.json", "task2_erase.json", "task3_hit.json", "task4_track.json"):
        spec = formats.load_task((fx / name).read_text())
        assert formats.load_task(formats.dump_task(spec)) == spec
    policy, tremor = formats.load_policy((fx / "policy_two_phase.json").read_text())
    assert formats.load_policy(formats.dump_policy(policy, tremor)) == (policy, tremor)

    log = formats.load_log(first.decode())
    assert formats.load_log(formats.dump_log(log)) == log
    result = formats.load_result((fx / "runs" / "q" / "result_s5.json").read_text())
    assert formats.load_result(formats.dump_result(result)) == result

    prim = MotionPrimitive(PrimitiveKind.MIN_JERK, Point3(0, 1.1, 0.4), Point3(0.2, 1.3, 0.5), 0.5)
    samples = formats.load_samples(formats.dump_samples(gen_primitive(prim)))
    assert formats.load_samples(formats.dump_samples(samples)) == samples
    report("determinism: byte-identical logs; parse/serialize identity on all formats")


def _frame(t, pointer):
    fb = FeedbackState(1.0, False, None, pointer)
    return FrameOutput(t, pointer, False, 0.5, 1.0, (0.5, 0.5), fb, False)


def test_task_metric_oracles():
    """Analytic fixtures: constant-offset tracking equals the offset to
    1e-6 px, a 15 px trailing chase gives 15 +/- 0.5 px minimal error,
    a two-run buttons log sums exactly."""
    # constant offset tracking (TASK 4)
    track = Track("UD", (800.0, 200.0), (800.0, 800.0), 200.0, 16.0)
    spec4 = TaskSpec(TaskKind.TRACK_MOVING, tracks=(track,))
    frames = []
    n = int(track.duration() * 60)
    for i in range(n + 1):
        t = i / 60.0
        obj = track.position(t)
        frames.append(_frame(t, (obj[0] + 30.0, obj[1])))
    log = TrajectoryLog("h", "T", frames=frames, markers=[Marker("run_start", 0.0, 0), Marker("run_end", frames[-1].t, 0)])
    res4 = eval_task4(log, spec4)
    assert abs(res4.aggregate - 30.0) < 1e-6

    # trailing 15 px chase (TASK 3)
    track3 = Track("LR", (1000.0, 500.0), (1800.0, 500.0), 200.0, 16.0)
    spec3 = TaskSpec(TaskKind.HIT_MOVING, tracks=(track3,))
    frames = []
    n = int(track3.duration() * 60)
    for i in range(n + 1):
        t = i / 60.0
        obj = track3.position(t)
        frames.append(_frame(t, (obj[0] - 15.0, obj[1])))
    log3 = TrajectoryLog("h", "T", frames=frames, markers=[Marker("run_start", 0.0, 0), Marker("run_end", frames[-1].t, 0)])
    res3 = eval_task3(log3, spec3)
    assert abs(res3.aggregate - 15.0) <= 0.5

    # two-run buttons total (TASK 1)
    target = Rect(100.0, 100.0, 50.0, 50.0)
    spec1 = TaskSpec(
        TaskKind.BUTTONS,
        buttons=(ButtonRun((target,), 0, (0.0, 0.0)), ButtonRun((target,), 0, (0.0, 0.0))),
    )
    markers = [
        Marker("run_start", 10.0, 0),
        Marker("select", 11.5, 0, (125.0, 125.0)),
        Marker("run_end", 11.5, 0),
        Marker("run_start", 20.0, 1),
        Marker("select", 22.5, 1, (125.0, 125.0)),
        Marker("run_end", 22.5, 1),
    ]
    log1 = TrajectoryLog("h", "T", frames=[_frame(10.0, (125.0, 125.0)), _frame(22.5, (125.0, 125.0))], markers=markers)
    res1 = eval_task1(log1, spec1)
    assert res1.per_run == (1500.0, 2500.0)
    assert res1.aggregate == 4000.0
    report("task metric oracles: offset=30 +/- 1e-6, trailing=15 +/- 0.5, task1 sum exact")
