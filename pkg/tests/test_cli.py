import csv
import io
import json
import math
import subprocess
import sys
from importlib.resources import files

import jsonschema
import numpy as np
import pytest

from orbitcascade.cli import DEFAULT_SEED, SWEEP_COLUMNS, main
from orbitcascade.conjunction import CdmRecord, ConjunctionGeometry, collision_probability
from orbitcascade.ingest import emit_cdm, emit_ephemeris, ring_ephemeris
from orbitcascade.simulator import Perturbation, SimConfig, run_cascade
from orbitcascade.stability import PolicyParams, capacity_bound, safe_distance_bound


def schema(name):
    return json.loads((files("orbitcascade") / "schemas" / f"{name}.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, schema_name, *argv):
    code, out, err = run(capsys, *argv)
    data = json.loads(out)
    jsonschema.validate(data, schema(schema_name))
    return code, data


STABLE = ("--alpha1", 0.3, "--alpha2", 1.5, "--alpha3", 0.5)
UNSTABLE = ("--alpha1", 2.0, "--alpha2", 1.5, "--alpha3", 0.5)


class TestStability:
    def test_stable(self, capsys):
        code, data = run_json(capsys, "stability", "stability", *STABLE, "--n", 4, 16)
        assert code == 0 and data["stable"] is True
        assert data["margin"] == pytest.approx(1.5**2 - 0.5**2 - 0.6)
        assert set(data["max_real_part"]) == {"4", "16"}

    def test_unstable(self, capsys):
        code, data = run_json(capsys, "stability", "stability", *UNSTABLE)
        assert code == 2 and data["stable"] is False

    def test_missing_alpha3(self, capsys):
        code, _, err = run(capsys, "stability", "--alpha1", 1, "--alpha2", 2)
        assert code == 1
        assert "--alpha3" in err

    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "stability", "--bogus", 1)
        assert code == 1 and "usage" in err

    def test_domain_violation(self, capsys):
        code, _, err = run(capsys, "stability", "--alpha1", -1, "--alpha2", 2, "--alpha3", 1)
        assert code == 1 and "error" in err

    def test_no_subcommand(self, capsys):
        assert run(capsys)[0] == 1

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[stability]\nalpha1 = 2.0\nalpha2 = 1.5\nalpha3 = 0.5\n")
        assert run(capsys, "stability", "--config", cfg)[0] == 2
        assert run(capsys, "stability", "--config", cfg, "--alpha1", 0.3)[0] == 0

    def test_missing_config(self, capsys, tmp_path):
        assert run(capsys, "stability", "--config", tmp_path / "nope.ini")[0] == 1

    def test_installed_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "orbitcascade.cli", "stability", *map(str, UNSTABLE)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
        assert json.loads(proc.stdout)["stable"] is False


class TestPc:
    def test_isotropic_flags(self, capsys):
        code, data = run_json(
            capsys, "pc", "pc", "--miss-x", 0, "--miss-y", 0, "--sigma-x", 1, "--sigma-y", 1, "--radius", 1
        )
        assert code == 0
        assert data["pc"] == pytest.approx(0.3934693, abs=1e-6)
        assert data["high_risk"] is True

    def test_monte_carlo_is_seeded(self, capsys):
        argv = ("pc", "--miss-x", 0.1, "--miss-y", 0.2, "--sigma-x", 0.3, "--sigma-y", 0.2, "--radius", 0.1,
                "--mc-samples", 20000)
        _, a = run_json(capsys, "pc", *argv)
        _, b = run_json(capsys, "pc", *argv)
        assert a == b
        assert a["monte_carlo"]["seed"] == DEFAULT_SEED

    def test_cdm_table(self, capsys, tmp_path, rng):
        recs, geoms = [], []
        for i in range(8):
            g = ConjunctionGeometry(*rng.normal(0, 0.3, size=2), *rng.uniform(0.05, 0.5, size=2), 0.02)
            recs.append(CdmRecord(f"A{i}", f"B{i}", 1.7e9 + i, collision_probability(g), 0.3))
            geoms.append(g)
        geoms[3] = None
        path = tmp_path / "cdm.csv"
        path.write_text(emit_cdm(recs, geoms))
        code, data = run_json(capsys, "pc_table", "pc", "--cdm", path)
        assert code == 0
        rows = data["rows"]
        assert len(rows) == 8
        assert rows[3]["pc_computed"] is None
        for i, row in enumerate(rows):
            if i != 3:
                assert row["abs_diff"] <= 1e-9 * max(row["pc_reported"], 1e-300) + 1e-15

    def test_malformed_table(self, capsys, tmp_path):
        path = tmp_path / "cdm.csv"
        path.write_text(
            "object_a_id,object_b_id,tca_iso8601,pc,miss_distance_km\n"
            "A,B,2026-01-01T00:00:00Z,1e-4,0.5\n"
            "A,B,2026-01-01T00:00:00Z,1.5,0.5\n"
            "A,B,not-a-date,1e-4,0.5\n"
        )
        code, _, err = run(capsys, "pc", "--cdm", path)
        assert code == 1
        assert "rows: 3, 4" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "pc", "--cdm", tmp_path / "absent.csv")[0] == 1


SIM = ("simulate", "--n", 12, *UNSTABLE, "--dt", 0.05, "--duration", 40, "--impulse", -1.0,
       "--threshold", 0.05, "--decouple-km", "inf", "--stride", 10)


class TestSimulate:
    def test_summary_and_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "traj.csv"
        code, data = run_json(capsys, "simulate", *SIM, "--out-csv", out_csv)
        assert code == 0
        assert data["amplification_factor"] == 11
        header = out_csv.read_text().splitlines()[0].split(",")
        assert header[:3] == ["time_s", "dtheta_0", "dtheta_1"] or header[0] == "time_s"

    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        _, out1, _ = run(capsys, *SIM, "--out-csv", a)
        _, out2, _ = run(capsys, *SIM, "--out-csv", b)
        assert out1 == out2
        assert a.read_bytes() == b.read_bytes()

    def test_paired(self, capsys, tmp_path):
        code, data = run_json(capsys, "simulate_paired", *SIM, "--paired", "--out-csv", tmp_path / "t.csv")
        assert code == 0
        c = data["comparison"]
        assert c["bilateral_amplification"] <= c["pairwise_amplification"]
        assert c["ratio"] == pytest.approx(c["bilateral_amplification"] / c["pairwise_amplification"], rel=1e-8)
        assert (tmp_path / "t_pairwise.csv").exists() and (tmp_path / "t_bilateral.csv").exists()

    def test_blow_up_exit_zero(self, capsys):
        code, data = run_json(
            capsys, "simulate", "simulate", "--n", 8, "--alpha1", 50, "--alpha2", 1, "--alpha3", 0.9,
            "--dt", 0.01, "--duration", 3000, "--impulse", -1, "--decouple-km", "inf", "--stride", 1000,
            "--quiescence-window", 0,
        )
        assert code == 0
        assert data["blow_up"] is True

    def test_bad_policy(self, capsys):
        assert run(capsys, *SIM, "--policy", "tri")[0] == 1


def sweep_rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestSweep:
    def test_single_point_matches_other_commands(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--alpha2", 1.5, "--alpha1-min", 0.3, "--alpha1-max", 0.3, "--alpha1-num", 1,
            "--alpha3-min", 0.5, "--alpha3-max", 0.5, "--alpha3-num", 1, "--c-max", 0.01,
        )
        assert code == 0
        header, row = sweep_rows(out)
        assert tuple(header) == SWEEP_COLUMNS
        rec = dict(zip(header, row))
        _, stab = run_json(capsys, "stability", "stability", *STABLE)
        assert float(rec["margin"]) == stab["margin"]
        assert float(rec["sup_gain"]) == stab["sup_gain"]
        assert rec["stable"] == "true"
        p = PolicyParams(0.3, 1.5, 0.5)
        dsafe = safe_distance_bound(p, 0.01)
        assert float(rec["dtheta_safe_rad"]) == pytest.approx(dsafe, rel=1e-8)
        _, cap = run_json(capsys, "capacity", "capacity", "--phase-factor", 1, "--dtheta-safe", dsafe)
        assert int(rec["max_sats"]) == cap["max_sats"] == capacity_bound(dsafe, 1)[0]

    def test_margin_changes_sign_once_along_alpha1(self, capsys):
        _, out, _ = run(
            capsys, "sweep", "--alpha2", 1.5, "--alpha1-min", 0.1, "--alpha1-max", 2.0, "--alpha1-num", 25,
            "--alpha3-min", 0.5, "--alpha3-max", 0.5, "--alpha3-num", 1,
        )
        margins = [float(r[3]) for r in sweep_rows(out)[1:]]
        assert all(b < a for a, b in zip(margins, margins[1:]))
        signs = np.sign(margins)
        assert np.count_nonzero(np.diff(signs)) == 1

    def test_alpha3_must_stay_below_alpha2(self, capsys):
        code, _, _ = run(
            capsys, "sweep", "--alpha2", 1.0, "--alpha1-min", 0.1, "--alpha1-max", 0.2,
            "--alpha3-min", 0.5, "--alpha3-max", 1.0,
        )
        assert code == 1

    @pytest.mark.slow
    def test_hundred_by_hundred(self, capsys, tmp_path):
        out = tmp_path / "grid.csv"
        code, _, _ = run(
            capsys, "sweep", "--alpha2", 1e-4, "--alpha1-min", 1e-10, "--alpha1-max", 1e-8, "--alpha1-num", 100,
            "--alpha3-min", 1e-6, "--alpha3-max", 9e-5, "--alpha3-num", 100, "--out", out,
        )
        assert code == 0
        rows = sweep_rows(out.read_text())
        assert len(rows) == 1 + 10000
        assert all(len(r) == len(SWEEP_COLUMNS) for r in rows)


class TestLifetimeCapacity:
    def test_lifetime(self, capsys):
        code, data = run_json(capsys, "lifetime", "lifetime", "--h", 2, "--t0", 1, "--maneuvers", 2, "--time", 1.5)
        assert code == 0
        assert data["time_of_nth"] == 1.5
        assert data["blowup_horizon"] == 2.0
        assert data["maneuver_count"] == pytest.approx(2.0, rel=1e-12)

    def test_lifetime_beyond_horizon(self, capsys):
        assert run(capsys, "lifetime", "--h", 2, "--t0", 1, "--time", 2.5)[0] == 1

    def test_capacity(self, capsys):
        code, data = run_json(capsys, "capacity", "capacity", "--phase-factor", 1, "--dtheta-safe", 0.1)
        assert code == 0
        assert data["max_sats"] == 62
        assert data["capacity_gbps"] == 1240

    def test_capacity_exact_ratio(self, capsys):
        _, data = run_json(capsys, "capacity", "capacity", "--phase-factor", 1, "--dtheta-safe", 2 * math.pi / 8)
        assert data["max_sats"] == 7


def write_ring(tmp_path, p, impulse, n=16, noise=0.0):
    cfg = SimConfig(n=n, params=p, dt_s=10.0, duration_s=2e5, decouple_altitude_km=math.inf,
                    perturbation=Perturbation(0, impulse, 0.0), record_stride=25, quiescence_window_steps=0)
    path = tmp_path / "eph.csv"
    path.write_text(emit_ephemeris(ring_ephemeris(run_cascade(cfg), 550.0, omega_noise=noise)))
    return path


class TestPipelineCommands:
    def test_infer(self, capsys, tmp_path):
        p = PolicyParams(1e-9, 1e-4, 1e-5)
        path = write_ring(tmp_path, p, -1e-7)
        code, data = run_json(capsys, "infer", "infer", "--ephemeris", path)
        assert code == 0
        # 9 printed digits, so agreement is limited by output rounding
        for k, want in zip(("alpha1", "alpha2", "alpha3"), p.as_tuple()):
            assert data[k] == pytest.approx(want, rel=1e-6)

    def test_infer_quiescent(self, capsys, tmp_path):
        path = write_ring(tmp_path, PolicyParams(1e-9, 1e-4, 1e-5), 0.0)
        code, _, err = run(capsys, "infer", "--ephemeris", path)
        assert code == 1 and "rank" in err

    def test_chains_without_seeds(self, capsys, tmp_path):
        path = write_ring(tmp_path, PolicyParams(1e-9, 1e-4, 1e-5), 0.0)
        cdm = tmp_path / "cdm.csv"
        cdm.write_text(emit_cdm([]))
        code, data = run_json(capsys, "chains", "chains", "--ephemeris", path, "--cdm", cdm, "--threshold", 1e-6)
        assert code == 0
        assert data == {"seed_count": 0, "total_hops": 0, "chains": []}

    def test_malformed_ephemeris(self, capsys, tmp_path):
        path = tmp_path / "eph.csv"
        path.write_text("sat_id,epoch_iso8601,x_km\nS,2026-01-01,7000\n")
        code, _, err = run(capsys, "infer", "--ephemeris", path)
        assert code == 1 and "missing columns" in err


class TestEndToEnd:
    def test_kicked_shell(self, capsys, tmp_path):
        from orbitcascade.orbital import RingState
        from orbitcascade.simulator import inject_perturbation, propagate

        p = PolicyParams(1e-8, 1e-4, 1e-5)
        s, _ = inject_perturbation(RingState.zeros(16), 0, -1e-6)
        _, ys = propagate(s, p, "pairwise", 60.0, 1000, 1)
        thr = 0.5 * float(np.abs(ys[:, 2]).max())
        cfg = SimConfig(n=16, params=p, dt_s=60.0, duration_s=3e5, decouple_altitude_km=math.inf,
                        trigger_threshold_rad=thr, perturbation=Perturbation(0, -1e-6, 3600.0),
                        quiescence_window_steps=0)
        res = run_cascade(cfg)
        recs = ring_ephemeris(res, 550.0)
        eph, cdm = tmp_path / "eph.csv", tmp_path / "cdm.csv"
        eph.write_text(emit_ephemeris(recs))
        cdm.write_text(emit_cdm([CdmRecord("SAT-0000", "DEBRIS", recs[0].epoch_s + 3000.0, 2e-5, 0.1)]))

        code, est = run_json(capsys, "infer", "infer", "--ephemeris", eph, "--cdm", cdm)
        assert code == 0
        for k, want in zip(("alpha1", "alpha2", "alpha3"), p.as_tuple()):
            assert est[k] == pytest.approx(want, rel=1e-6)

        code, out = run_json(capsys, "chains", "chains", "--ephemeris", eph, "--cdm", cdm,
                             "--threshold", repr(thr), "--sats-per-ring", 16)
        assert code == 0
        assert out["seed_count"] == 1
        assert out["total_hops"] == len(res.cascaded_events) == 15
