import csv
import json
from collections import Counter

import numpy as np
import pytest

from hodowave import cli, harness
from hodowave import diagnostics as dg
from hodowave.errors import DomainError
from hodowave.harness import (
    CLAIM_IDS,
    REGISTRY,
    VerifyConfig,
    check_convex,
    check_log_convex,
    check_monotone,
    perturb_coefficient,
    verify_all,
)

P = np.linspace(0.0, 1.0, 65)


@pytest.fixture(scope="module")
def w1_reports(w1):
    return {r.claim_id: r for r in verify_all(w1)}


@pytest.fixture(scope="module")
def flat_reports(flat):
    return {r.claim_id: r for r in verify_all(flat)}


def test_monotone_checks():
    r = check_monotone(np.ones(10), "nonincreasing", tol=1e-9)
    assert r.status == "pass" and r.worst_margin == 0.0
    assert check_monotone(P, "nonincreasing").status == "fail"
    assert check_monotone(P, "increasing").status == "pass"
    assert check_monotone(np.ones(10), "increasing").status == "fail"
    with pytest.raises(DomainError):
        check_monotone([1.0, 2.0])


def test_convexity_checks():
    assert check_convex(P**2).status == "pass"
    assert check_convex(P**2, concave=True).status == "fail"
    r = check_log_convex(np.exp(P))
    assert r.status == "pass" and abs(r.worst_margin) < 1e-15
    with pytest.raises(DomainError):
        check_log_convex(P)
    with pytest.raises(DomainError):
        check_convex(P[:4])


def test_w1_curve_checks(w1):
    assert check_monotone(dg.diagnostic_curve(w1, "T").values).status == "pass"
    m1 = dg.diagnostic_curve(w1, "Ms", s=1.0).values
    assert check_convex(m1).status == "pass"
    assert check_log_convex(m1).status == "pass"


def test_registry_is_frozen():
    assert len(REGISTRY) == len(set(CLAIM_IDS)) == 78
    families = Counter(cid.split(".")[0] for cid in CLAIM_IDS)
    assert families == {
        "means": 18,
        "cell_energy": 2,
        "period": 9,
        "energy": 7,
        "energy_s": 14,
        "region_energy": 4,
        "region_energy_s": 4,
        "area": 7,
        "length": 7,
        "surface": 5,
        "map": 1,
    }


def test_reports_cover_registry(w1_reports):
    assert sorted(w1_reports) == list(CLAIM_IDS)


def test_w1_suite(w1_reports):
    statuses = Counter(r.status for r in w1_reports.values())
    assert statuses["fail"] == 0
    for r in w1_reports.values():
        assert (r.status == "pass") == (r.worst_margin >= -r.tolerance)
    # Singular fixed-frame integrand at the bed for s < 0.
    assert w1_reports["energy_s.fixed.monotone.s=-1"].status == "finding"


def test_flat_suite(flat_reports):
    for cid in ("surface.crest_min", "surface.trough_max", "surface.interior_max", "surface.bernoulli_gap"):
        assert flat_reports[cid].status == "skipped"
    for cid in (
        "energy.moving.constant",
        "region_energy.moving.identity",
        "period.formula",
        "cell_energy.moving",
        "energy_s.identity.s=0",
        "energy_s.identity.s=1",
        "length.bed",
    ):
        assert flat_reports[cid].status == "pass", cid
    # The uniform flow violates the two halved bounds and saturates the corrected ones.
    assert flat_reports["area.bound"].status == "finding"
    assert flat_reports["length.bound"].status == "finding"
    assert flat_reports["area.bound_corrected"].status == "pass"
    assert flat_reports["length.bound_corrected"].status == "pass"
    assert all(r.status != "fail" for r in flat_reports.values())


def test_corrupted_wave_fails_bernoulli(w1):
    bad = perturb_coefficient(w1, 0, 1e-3)
    (report,) = verify_all(bad, claim_ids={"surface.bernoulli"})
    assert report.status == "fail"


def test_claim_errors_are_isolated(w1, monkeypatch):
    def boom(ctx):
        raise DomainError("synthetic")

    claims = list(harness.REGISTRY)
    claims[0] = harness.Claim(claims[0].claim_id, claims[0].statement, boom)
    monkeypatch.setattr(harness, "REGISTRY", tuple(claims))
    out = verify_all(w1, VerifyConfig(include_lagrangian=False), claim_ids={claims[0].claim_id, "length.bed"})
    status = {r.claim_id: r.status for r in out}
    assert status[claims[0].claim_id] == "fail" and status["length.bed"] == "pass"


def test_worker_cap(monkeypatch):
    monkeypatch.setenv(harness.WORKERS_ENV, "1")
    assert harness.worker_count() == 1
    assert harness.worker_count(3) == 3


def test_reports_independent_of_workers(w1):
    ids = {"means.convex.s=2", "period.formula", "length.arclength", "map.inversion_roundtrip"}
    a = verify_all(w1, VerifyConfig(workers=1), claim_ids=ids)
    b = verify_all(w1, VerifyConfig(workers=4), claim_ids=ids)
    assert [r.row() for r in a] == [r.row() for r in b]


def test_wave_round_trip(w1, tmp_path):
    path = tmp_path / "w1.wave.json"
    harness.save_wave(w1, path)
    back = harness.load_wave(path)
    assert back.fingerprint() == w1.fingerprint()
    assert back.c == w1.c and np.array_equal(back.series.coeffs, w1.series.coeffs)
    with pytest.raises(DomainError):
        harness.wave_from_dict({"format": "other"})


def test_manifest(w1):
    m = harness.RunManifest.build(w1, VerifyConfig()).to_dict()
    assert m["params"]["height"] == 5.0 and m["grids"]["n_points"] == 65
    json.dumps(m)


# ------------------------------------------------------------------ CLI


def test_cli_solve_flat(tmp_path):
    out = tmp_path / "flat"
    assert cli.main(["solve", "--L", "100", "--d", "10", "--H", "0", "--out", str(out)]) == 0
    wave = harness.load_wave(f"{out}.wave.json")
    assert wave.is_flat


def test_cli_pipeline(w1, tmp_path):
    wave_path = tmp_path / "w1.wave.json"
    harness.save_wave(w1, wave_path)
    assert cli.main(["diagnose", str(wave_path), "--functional", "T", "--p-points", "65"]) == 0
    rows = list(csv.reader(open(tmp_path / "w1.T.csv")))
    assert rows[0][0].startswith("# functional=T") and rows[1] == ["p", "T"]
    assert len(rows) == 2 + 65
    first = open(tmp_path / "w1.T.csv").read()
    assert cli.main(["diagnose", str(wave_path), "--functional", "T", "--p-points", "65"]) == 0
    assert open(tmp_path / "w1.T.csv").read() == first
    assert cli.main(["trace", str(wave_path), "--p", "20", "--starts", "2", "--samples", "17"]) == 0
    assert len(list(csv.reader(open(tmp_path / "w1.trace1.csv")))) == 18


def test_cli_verify(w1, tmp_path, capsys):
    wave_path = tmp_path / "w1.wave.json"
    harness.save_wave(w1, wave_path)
    assert cli.main(["verify", str(wave_path), "--no-trajectories"]) == 0
    rows = list(csv.reader(open(tmp_path / "w1.report.csv")))
    assert rows[0] == harness.REPORT_HEADER and len(rows) == 1 + len(CLAIM_IDS)
    assert "fail=0" in capsys.readouterr().out


def test_cli_verify_fails_on_corruption(w1, tmp_path):
    wave_path = tmp_path / "bad.wave.json"
    harness.save_wave(perturb_coefficient(w1, 0, 1e-3), wave_path)
    assert cli.main(["verify", str(wave_path), "--no-trajectories"]) == 1


def test_cli_usage_and_physics_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", "--L", "100"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["diagnose", "x.wave.json", "--functional", "Bogus"])
    assert info.value.code == 2
    assert cli.main(["solve", "--L", "100", "--d", "10", "--H", "50", "--out", str(tmp_path / "x")]) == 1
    assert cli.main(["verify", str(tmp_path / "missing.wave.json")]) == 1


@pytest.mark.slow
def test_cli_sweep(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(
        ["sweep", "--L", "100", "--depth-ratios", "0.2", "--height-ratios", "0,0.02", "--no-trajectories", "--out", str(out)]
    )
    assert code == 0
    rows = list(csv.reader(open(out)))
    assert len(rows) == 3 and rows[1][5] == "0"
