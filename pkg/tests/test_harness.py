import copy
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from risanchor.cli import main
from risanchor.errors import RankDeficientError, ScenarioError
from risanchor.harness import (derive_seed, dumps_scenario, heatmap_csv, load_preset, load_scenario,
                               mc_csv, run_monte_carlo, save_scenario, scenario_from_dict,
                               sweep_crb_map, write_heatmap_csv)
from risanchor.harness.io import HEATMAP_HEADER, MC_HEADER
from risanchor.harness.sweep import HeatmapResult, Context, position_crb

MINIMAL = {
    "ris": [
        {"origin": [-0.15, -3.0], "slope": 0.0, "length_pixels": 50, "pixel_spacing": 0.006,
         "side": 1, "bs": {"position": [0.0, -300.0]}},
        {"origin": [2.8, 0.15], "slope": -1.0, "length_pixels": 50, "pixel_spacing": 0.006,
         "side": 1, "bs": {"position": [250.0, 250.0]}},
    ],
    "pilots": {"f_start_hz": 24.5e9, "f_stop_hz": 25.5e9, "f_count": 21, "t_span_s": 0.025,
               "t_count": 11, "tx_power": 1.0},
    "motion": {"speed_mps": 10.0},
    "snr_db": 47.0,
    "grid": {"x": [-1.0, 1.0, 3], "y": [-1.0, 1.0, 2]},
    "seed": 5,
}


def _doc(**changes):
    doc = copy.deepcopy(MINIMAL)
    doc.update(changes)
    return doc


@pytest.fixture
def minimal():
    return scenario_from_dict(_doc())


# ------------------------------------------------------------ scenario I/O

def test_defaults_applied(minimal):
    assert [s.profile for s in minimal.ris] == ["mirror", "mirror"]
    assert minimal.ris[0].pathloss == 1.0 and minimal.ris[0].active
    assert minimal.noise_var == pytest.approx(10 ** -4.7)


def test_single_ris_rejected_for_positioning():
    sc = scenario_from_dict(_doc(ris=MINIMAL["ris"][:1]))
    with pytest.raises(ScenarioError, match="at least 2"):
        sweep_crb_map(sc)


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d["ris"][0].pop("side"), "ris[0].side"),
    (lambda d: d["ris"][1].update(profile="fancy"), "ris[1].profile"),
    (lambda d: d["pilots"].update(f_count=0), "pilots.f_count"),
    (lambda d: d["motion"].update(speed_mps=-1), "motion.speed_mps"),
    (lambda d: d["grid"].update(x=[0, 1]), "grid.x"),
])
def test_validation_names_field(mutate, field):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert field in str(err.value)


def test_parse_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"ris": [\n  1,,\n]}')
    with pytest.raises(ScenarioError, match="line 2"):
        load_scenario(path)


@pytest.mark.parametrize("name", ["desk", "full"])
def test_save_load_round_trip(name, tmp_path):
    sc = load_preset(name)
    text = dumps_scenario(sc)
    path = tmp_path / "s.json"
    save_scenario(sc, path)
    again = load_scenario(path)
    assert again == sc
    assert dumps_scenario(again) == text


def test_preset_constants():
    sc = load_preset("full")
    assert len(sc.ris) == 4
    assert all(s.segment.pixel_count == 100 for s in sc.ris)
    assert sc.snr_db == 47.0 and sc.speed_mps == 10.0
    p = sc.pilots
    assert (p.f_start_hz, p.f_stop_hz, p.f_count, p.t_count, p.t_span_s) == (24.5e9, 25.5e9, 201, 100, 0.025)
    assert sorted((abs(s.bs_position.x), abs(s.bs_position.y)) for s in sc.ris) == [(251.0, 251.0)] * 4
    assert sc.grid.x[2] == sc.grid.y[2] == 30
    desk = load_preset("desk")
    assert (desk.pilots.f_count, desk.pilots.t_count, desk.grid.x[2], desk.grid.y[2]) == (51, 25, 10, 10)


def test_seed_derivation_is_stable_and_distinct():
    assert derive_seed(1, 0, 3) == derive_seed(1, 0, 3)
    seeds = {derive_seed(1, 0, r) for r in range(10)} | {derive_seed(1, 1, n, 0) for n in range(10)}
    assert len(seeds) == 20


# ------------------------------------------------------------ sweeps

def test_parallel_subset_is_rank_deficient():
    sc = load_preset("desk").with_grid(3, 3)
    slopes = [s.segment.slope for s in sc.ris]
    pair = [i for i in range(4) if slopes[i] == slopes[0]]
    result = sweep_crb_map(sc, pair)
    assert np.all(result.status == "rank-deficient")
    assert np.all(np.isnan(result.crb_y))


def test_halving_noise_halves_bound(minimal):
    loud = sweep_crb_map(minimal)
    quiet = sweep_crb_map(replace(minimal, snr_db=minimal.snr_db + 10 * math.log10(2)))
    ok = loud.status == "ok"
    assert ok.all()
    np.testing.assert_allclose(quiet.crb_y[ok], 0.5 * loud.crb_y[ok], rtol=1e-12)
    np.testing.assert_allclose(quiet.crb_x[ok], 0.5 * loud.crb_x[ok], rtol=1e-12)


def test_sweep_matches_direct_bound(minimal):
    result = sweep_crb_map(minimal)
    ctx = Context.build(minimal, [0, 1])
    bound = position_crb(ctx, (result.xs[2], result.ys[1]))
    assert result.crb_y[1, 2] == pytest.approx(bound.crb_y, rel=1e-10)
    assert result.crb_x[1, 2] == pytest.approx(bound.crb_x, rel=1e-10)


def test_cell_on_a_pixel_is_flagged():
    doc = _doc(grid={"x": [-0.15, -0.15, 1], "y": [-3.0, 0.0, 2]})
    result = sweep_crb_map(scenario_from_dict(doc))
    assert list(result.status[:, 0]) == ["singular", "ok"]


def test_heatmap_csv_layout():
    r = HeatmapResult(np.array([0.0, 1.0]), np.array([5.0, 6.0]),
                      np.array([[1.0, 2.0], [3.0, np.nan]]), np.array([[4.0, 5.0], [6.0, np.nan]]),
                      np.array([["ok", "ok"], ["ok", "singular"]], dtype=object))
    lines = heatmap_csv(r).splitlines()
    assert lines[0] == HEATMAP_HEADER
    assert len(lines) == 5
    assert lines[1] == "0.0,5.0,1.0,4.0,ok"
    assert lines[2].startswith("1.0,5.0,")
    assert lines[4] == "1.0,6.0,,,singular"


def test_full_precision_floats():
    r = HeatmapResult(np.array([0.1]), np.array([1 / 3]), np.array([[2 / 3]]), np.array([[1e-17]]),
                      np.array([["ok"]], dtype=object))
    row = heatmap_csv(r).splitlines()[1].split(",")
    assert float(row[1]) == 1 / 3 and float(row[2]) == 2 / 3


def test_write_error_names_path(tmp_path, minimal):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="out.csv"):
        write_heatmap_csv(sweep_crb_map(minimal), target)


def test_parallel_sweep_matches_serial(minimal):
    a = heatmap_csv(sweep_crb_map(minimal, workers=1))
    b = heatmap_csv(sweep_crb_map(minimal, workers=2))
    assert a == b


# ------------------------------------------------------------ Monte-Carlo

def test_noise_free_campaign_at_default_ue():
    sc = replace(load_preset("desk"), snr_db=math.inf)
    r = run_monte_carlo(sc, 1)
    assert r.failures == 0
    assert np.hypot(*r.errors[0]) < 1e-3


def test_noise_free_single_pixel_surfaces_are_exact():
    doc = _doc(snr_db=math.inf)
    for item in doc["ris"]:
        item["length_pixels"] = 1
    r = run_monte_carlo(scenario_from_dict(doc), 1, ue=(0.3, 0.2))
    assert np.hypot(*r.errors[0]) < 1e-6


def test_campaign_is_reproducible(minimal):
    a = mc_csv(run_monte_carlo(minimal, 4, seed=9))
    assert a == mc_csv(run_monte_carlo(minimal, 4, seed=9))
    assert a == mc_csv(run_monte_carlo(minimal, 4, seed=9, workers=2))
    assert a != mc_csv(run_monte_carlo(minimal, 4, seed=10))


def test_mc_csv_layout(minimal):
    text = mc_csv(run_monte_carlo(minimal, 3, seed=1))
    lines = text.splitlines()
    assert lines[0] == MC_HEADER
    assert [ln.split(",")[0] for ln in lines[1:4]] == ["0", "1", "2"]
    summary = dict(ln[2:].split("=") for ln in lines if ln.startswith("# "))
    assert {"rmse_x_m", "rmse_y_m", "sqrt_crb_x_m", "sqrt_crb_y_m", "trials", "failures"} <= summary.keys()
    assert summary["trials"] == "3"


def test_failures_are_counted_not_fatal(minimal):
    # Far below threshold some Doppler estimates exceed the kinematic limit.
    r = run_monte_carlo(replace(minimal, snr_db=-20.0), 10, seed=2, ue=(0.0, 0.0))
    assert r.trials == 10 and 0 < r.failures < 10
    good = r.errors[r.ok]
    assert r.rmse_x == pytest.approx(np.sqrt(np.mean(good[:, 0] ** 2)))


def test_parallel_pair_monte_carlo_rejected():
    sc = load_preset("desk")
    slopes = [s.segment.slope for s in sc.ris]
    pair = [i for i in range(4) if slopes[i] == slopes[0]]
    with pytest.raises(RankDeficientError):
        run_monte_carlo(sc, 1, ris_subset=pair)


# ------------------------------------------------------------ CLI

def test_cli_crb_map(tmp_path, capsys):
    out = tmp_path / "map.csv"
    assert main(["crb-map", "--grid", "2x3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEATMAP_HEADER and len(lines) == 7


def test_cli_monte_carlo_stdout(capsys):
    assert main(["monte-carlo", "--trials", "2", "--seed", "3"]) == 0
    assert capsys.readouterr().out.startswith(MC_HEADER)


def test_cli_demo_lines(capsys):
    assert main(["demo-lines", "--ue", "0.2,-0.4"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0].startswith("ris,slope,intercept_m")
    fix = dict(ln[2:].split("=") for ln in text.splitlines() if ln.startswith("# "))
    assert abs(float(fix["fix_x_m"]) - 0.2) < 0.05


def test_cli_validation_exit(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps(_doc(ris=MINIMAL["ris"][:1])))
    assert main(["crb-map", "--scenario", str(path)]) == 1
    assert "at least 2" in capsys.readouterr().err


def test_cli_bad_ris_index(capsys):
    assert main(["crb-map", "--ris", "1,9"]) == 1


def test_cli_io_exit(tmp_path, capsys):
    assert main(["crb-map", "--scenario", str(tmp_path / "nope.json")]) == 2
    assert main(["crb-map", "--grid", "2x2", "--out", str(tmp_path / "d" / "x.csv")]) == 2


def test_cli_rejects_bad_flags(capsys):
    with pytest.raises(SystemExit):
        main(["crb-map", "--grid", "ten"])


def test_cli_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["monte-carlo", "--trials", "3", "--seed", "4", "--out", str(a)])
    main(["monte-carlo", "--trials", "3", "--seed", "4", "--workers", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
