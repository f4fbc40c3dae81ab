"""HTTP API tests with the in-process test client."""

import time

import pytest
from fastapi.testclient import TestClient

from rsma_sim import __version__
from rsma_sim.baselines import SchemeId
from rsma_sim.config import SimConfig, with_overrides
from rsma_sim.harness import emit_csv, run_sweep
from rsma_sim.service.app import create_app


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


TINY = {
    "schemes": ["mu_mimo"],
    "subcarriers": 16,
    "taps": 4,
    "cp_len": 4,
    "snr_db": [5.0],
    "trials": 3,
    "block_bits": 48,
    "delay_packets": 0,
    "seed": 11,
    "workers": 1,
}


def tiny_config():
    return with_overrides(
        SimConfig(),
        schemes=(SchemeId.MU_MIMO,),
        subcarriers=16,
        taps=4,
        cp_len=4,
        snr_db=(5.0,),
        trials=3,
        block_bits=48,
        delay_packets=0,
        seed=11,
        workers=1,
    )


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_simulate_matches_direct_run(client):
    resp = client.post("/simulate", json=TINY)
    assert resp.status_code == 200
    body = resp.json()
    want = emit_csv(run_sweep(tiny_config()))
    assert body["csv"] == want
    assert body["columns"][0] == "scheme"
    assert len(body["rows"]) == 1
    row = body["rows"][0]
    assert row["scheme"] == "mu_mimo"
    assert row["delay_slots"] is None  # no delay phase requested


def test_simulate_accepts_config_text(client):
    req = {
        "config_text": "scheme = mu_mimo\nsubcarriers = 16\ntaps = 4\ncp_len = 4\n"
        "snr_db = 5\ntrials = 3\nblock_bits = 48\ndelay_packets = 0\nseed = 11\n",
        "workers": 1,
    }
    resp = client.post("/simulate", json=req)
    assert resp.status_code == 200
    assert resp.json()["csv"] == emit_csv(run_sweep(tiny_config()))


def test_simulate_rejects_invalid_config(client):
    bad = dict(TINY, users=5, tx_antennas=2)
    resp = client.post("/simulate", json=bad)
    assert resp.status_code == 422


def test_simulate_rejects_unknown_field(client):
    resp = client.post("/simulate", json=dict(TINY, bogus=1))
    assert resp.status_code == 422


def test_job_flow(client):
    resp = client.post("/jobs", json=TINY)
    assert resp.status_code == 202
    job_id = resp.json()["id"]
    deadline = time.time() + 60
    while time.time() < deadline:
        status = client.get(f"/jobs/{job_id}").json()
        if status["state"] in ("done", "error"):
            break
        time.sleep(0.05)
    assert status["state"] == "done"
    assert status["rows"][0]["scheme"] == "mu_mimo"
    csv_resp = client.get(f"/jobs/{job_id}/csv")
    assert csv_resp.status_code == 200
    assert csv_resp.text == emit_csv(run_sweep(tiny_config()))


def test_job_not_found(client):
    assert client.get("/jobs/deadbeef").status_code == 404
    assert client.get("/jobs/deadbeef/csv").status_code == 404


def test_figures_listing(client):
    resp = client.get("/figures")
    assert resp.status_code == 200
    assert set(resp.json()["figures"]) == {"2a", "2b", "3a", "3b"}


def test_figure_submit_rejects_unknown(client):
    assert client.post("/figures/5x", json={}).status_code == 404
