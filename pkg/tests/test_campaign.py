import csv
import json
import shutil

import pytest

from advfuzz.campaign import (CONFIG_KEYS, REPORT_FILE, TIMINGS_FILE, WALL_REPORT_FILE, CampaignReport,
                              CampaignSettings, export_series, load_campaign, proportion, report, run_campaign, scenario_seed,
                              settings_from_file, summarize, worker_count)
from advfuzz.liability import EGO_FAULT, NPC_FAULT
from advfuzz.records import (COLLISION, COLLISION_STOPPED, ILLEGAL_LINE_CROSS, ViolationEvent, record_path,
                             save_record)

from conftest import synthetic_record


@pytest.fixture(scope="module")
def campaign(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "c"
    settings = CampaignSettings(road="urban2", budget=24, seed=3, tau=8, offspring=8, out=str(out))
    return out, run_campaign(settings)


def test_proportion_arithmetic():
    assert proportion(470, 540) == 87.04
    assert proportion(233, 340) == 68.53
    assert proportion(0, 0) == 0.0


def test_empty_directory_reports_zero(tmp_path):
    rep = report(tmp_path)
    assert rep == CampaignReport()
    assert rep.proportion == 0.0 and rep.scenario_num == 0


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        report(tmp_path / "nope")


def event_record(frames, kind, verdict=None):
    rows = [[(100.0 + k, 1.75, 0, 10), (200.0, 5.25, 0, 0)] for k in range(frames)]
    rec = synthetic_record(rows, outcome=COLLISION_STOPPED if kind == COLLISION else "Completed")
    rec.violations = [ViolationEvent(kind, frames - 1, ("ego", "npc0") if kind == COLLISION else ("ego",))]
    if kind == COLLISION:
        rec.liability = [{"frame": frames - 1, "npc": "npc0", "verdict": verdict, "rule": "r",
                          "evidence": {"x": 0.0, "ego_lane": 0, "npc_lane": 0, "switched": False,
                                       "npc_maneuver": None}}]
    else:
        rec.liability = []
    return rec


def test_first_violation_from_wall_offsets(tmp_path):
    # four violating scenarios with measured durations; events at the last recorded frame
    specs = [(30, COLLISION, NPC_FAULT, 90.0), (10, ILLEGAL_LINE_CROSS, None, 45.0),
             (20, COLLISION, EGO_FAULT, 120.0), (5, COLLISION, NPC_FAULT, 30.0)]
    timings = {}
    for i, (frames, kind, verdict, wall) in enumerate(specs):
        save_record(event_record(frames, kind, verdict), record_path(tmp_path, 0, i))
        timings[f"000/{i:03d}"] = wall
    (tmp_path / TIMINGS_FILE).write_text(json.dumps(timings))
    starts = [0.0, 90.0, 135.0, 255.0]
    event_times = [(s + (f - 1) * 0.1) / 60 for s, (f, *_rest) in zip(starts, specs)]
    wall = report(tmp_path, clock="wall")
    assert wall.first_violation_minute == pytest.approx(min(event_times))
    assert wall.first_ego_fault_minute == pytest.approx(event_times[1])
    assert wall.minutes_per_scenario == pytest.approx(sum(t for *_r, t in specs) / 60 / 4)
    assert (wall.violation_num, wall.ego_fault_num, wall.proportion) == (4, 2, 50.0)
    sim = report(tmp_path)
    assert sim.minutes_per_scenario == pytest.approx((30 + 10 + 20 + 5) * 0.1 / 60 / 4)


def test_time_metrics_monotone_in_event_times():
    early = summarize([event_record(5, ILLEGAL_LINE_CROSS), event_record(50, ILLEGAL_LINE_CROSS)])
    late = summarize([event_record(50, ILLEGAL_LINE_CROSS), event_record(50, ILLEGAL_LINE_CROSS)])
    assert early.first_violation_minute <= late.first_violation_minute


def test_no_violations_gives_undefined_times():
    rec = event_record(5, ILLEGAL_LINE_CROSS)
    rec.violations = []
    rep = summarize([rec])
    assert rep.violation_num == 0 and rep.minutes_per_violation is None and rep.first_violation_minute is None


def test_report_recomputed_from_disk_equals_live(campaign):
    out, live = campaign
    assert report(out) == live
    assert CampaignReport.from_dict(json.loads((out / REPORT_FILE).read_text())) == live
    assert live.scenario_num == 24
    assert live.ego_fault_num <= live.violation_num
    assert sum(live.histogram.values()) == live.violation_num
    assert (out / WALL_REPORT_FILE).exists()
    assert json.loads((out / WALL_REPORT_FILE).read_text())["clock"] == "wall"


def test_rerun_is_byte_identical(campaign, tmp_path):
    out, _ = campaign
    other = tmp_path / "again"
    run_campaign(CampaignSettings(road="urban2", budget=24, seed=3, tau=8, offspring=8, out=str(other)))
    for name in ("000/000.json", "002/007.json", REPORT_FILE, "campaign.json", "restarts.json"):
        assert (other / name).read_bytes() == (out / name).read_bytes()


def test_refuses_to_overwrite(campaign):
    out, _ = campaign
    with pytest.raises(FileExistsError):
        run_campaign(CampaignSettings(budget=2, out=str(out)))


def test_exports(campaign, tmp_path):
    out, live = campaign
    rows = list(csv.reader(open(export_series(out, "speed_traces", tmp_path))))
    records, _, _ = load_campaign(out)
    assert len(rows) - 1 == sum(len(r.frames) * len(r.vehicles) for r in records)
    assert rows[0] == ["generation", "index", "frame", "time", "vehicle", "speed"]
    fit = list(csv.reader(open(export_series(out, "fitness", tmp_path))))
    assert len(fit) - 1 == 3 == len(live.best_fitness)
    hist = list(csv.reader(open(export_series(out, "histogram", tmp_path))))
    assert sum(int(c) for _, c in hist[1:]) == live.violation_num
    with pytest.raises(ValueError):
        export_series(out, "pie")


def test_settings_file_and_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"road": "highway4", "budget": 10, "epsilon_m": 0.2, "seed": 4}))
    s = settings_from_file(path, seed=9, hours=None)
    assert (s.road, s.budget, s.epsilon, s.seed) == ("highway4", 10, 0.2, 9)
    assert set(CONFIG_KEYS) >= {"road", "budget", "hours", "seed", "ell", "tau", "w1", "w2", "epsilon_m"}
    path.write_text(json.dumps({"budget": 1, "colour": "red"}))
    with pytest.raises(ValueError):
        settings_from_file(path)
    with pytest.raises(ValueError):
        CampaignSettings()


def test_seed_derivation_and_workers(monkeypatch):
    assert scenario_seed(1, 0, 0) == scenario_seed(1, 0, 0) != scenario_seed(1, 0, 1)
    monkeypatch.setenv("ADVFUZZ_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("ADVFUZZ_WORKERS", "0")
    with pytest.raises(ValueError):
        worker_count()


def test_corrupt_record_is_skipped(campaign, tmp_path, caplog):
    out, live = campaign
    copy = tmp_path / "copy"
    shutil.copytree(out, copy)
    (copy / "000" / "001.json").write_text("{ not json")
    rep = report(copy)
    assert rep.corrupt_records == 1 and rep.scenario_num == live.scenario_num - 1
    assert "skipping corrupt record" in caplog.text
