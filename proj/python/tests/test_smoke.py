import copy
import pathlib

import pytest

import acp

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCENARIO = str(ROOT / "scenarios" / "restaurant.toml")


@pytest.fixture(scope="module")
def transcript():
    return acp.run_scenario(SCENARIO)


def test_scenario_completes_and_replays_clean(transcript):
    assert transcript["status"] == "completed"
    assert [p["phase"] for p in transcript["phases"]] == [1, 2, 3, 4, 5, 6, 7]
    verdict = acp.replay(transcript)
    assert verdict["clean"] is True


def test_same_seed_same_hash(transcript):
    again = acp.run_scenario(SCENARIO, seed=42)
    other = acp.run_scenario(SCENARIO, seed=43)
    assert again["transcript_hash"] == transcript["transcript_hash"]
    assert other["transcript_hash"] != transcript["transcript_hash"]


def test_tampered_transcript_is_flagged(transcript):
    tampered = copy.deepcopy(transcript)
    tampered["events"][3]["envelope"]["payload"]["tampered"] = True
    verdict = acp.replay(tampered)
    assert verdict["clean"] is False
    assert any(v["rule"] == "signature" for v in verdict["violations"]["violations"])


def test_message_order(transcript):
    aip = [e["envelope"] for e in transcript["events"] if e["envelope"]["protocol"] == "AIP"]
    assert acp.check_message_order(aip)["ok"] is True
    report = aip.pop()
    assert acp.check_message_order([report] + aip)["ok"] is False


def test_match_score_spot_values():
    d = {"agent": "acp://root/a", "capability_tags": ["a"], "version": 1}
    assert acp.match_score({"required": ["a", "b"]}, d) == pytest.approx(0.65, abs=1e-12)
    assert acp.match_score({"required": ["a"]}, d) == pytest.approx(1.0, abs=1e-12)


def test_discover_ranks_by_score_then_id():
    ds = [
        {"agent": "acp://root/b", "capability_tags": ["x", "y"], "version": 1},
        {"agent": "acp://root/a", "capability_tags": ["x"], "version": 1},
        {"agent": "acp://root/c", "capability_tags": ["z"], "version": 1},
    ]
    hits = acp.discover(ds, {"required": ["x"], "optional": ["y"], "mode": "loose"})
    assert [h["agent"] for h in hits] == ["acp://root/b", "acp://root/a"]


def test_sign_and_verify(transcript):
    seed = "11" * 32
    pub = acp.public_key(seed)
    env = dict(transcript["events"][0]["envelope"])
    env.pop("signature")
    signed = acp.sign_envelope(env, seed)
    assert acp.verify_envelope(signed, pub)
    signed["payload"] = {"changed": 1}
    assert not acp.verify_envelope(signed, pub)


def test_anchor_logs_verify(transcript):
    for log in transcript["anchors"].values():
        assert acp.verify_anchor(log)
        if log:
            broken = copy.deepcopy(log)
            broken[0]["seq"] = 7
            assert not acp.verify_anchor(broken)


def test_errors_carry_codes():
    with pytest.raises(acp.AcpError) as info:
        acp.match_score({}, {"agent": "acp://root/a", "capability_tags": ["a"], "version": 1})
    assert info.value.code
    assert isinstance(acp.canonical_encode({"b": 1, "a": [1, 2]}), str)
