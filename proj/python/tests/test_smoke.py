import json

import pytest

import agrifield as af


def test_adc_conversion_endpoints():
    assert af.adc_to_moisture(0) == 100.0
    assert af.adc_to_moisture(1023) == 0.0
    assert af.moisture_to_adc(50.0) == 512
    with pytest.raises(ValueError):
        af.adc_to_moisture(2000)


def test_modbus_request_and_probe_reply():
    assert af.crc16(b"123456789") == 0x4B37
    req = af.encode_read_request(1, 0x1E, 3)
    assert req.hex(" ").upper() == "01 03 00 1E 00 03 65 CD"
    reply = af.slave_respond(req, 10, 5, 10)
    address, function, payload = af.decode_frame(reply)
    assert (address, function) == (1, 3)
    assert payload == bytes([6, 0, 10, 0, 5, 0, 10])
    assert af.slave_respond(af.encode_read_request(2, 0x1E, 3), 10, 5, 10) is None
    with pytest.raises(ValueError):
        af.decode_frame(req[:-1] + bytes([req[-1] ^ 1]))


def test_wheat_doses():
    d = af.deficit(af.NutrientProfile(10, 5, 10), af.NutrientProfile(100, 20, 60))
    assert d == af.NutrientProfile(90, 15, 50)
    rec = af.recommend_doses(d, round_nitrogen=True)
    assert rec.mop_kg_ha == pytest.approx(83.33, abs=0.01)
    assert rec.dap_kg_ha == pytest.approx(32.61, abs=0.01)
    assert rec.urea_kg_ha == pytest.approx(182.61, abs=0.01)
    assert af.recommend_doses(d).urea_kg_ha == pytest.approx(182.89, abs=0.01)


def test_decide():
    assert af.decide(40.0) == (True, "below_threshold")
    assert af.decide(55.0, pump_on=True)[0] is False
    assert af.decide(10.0, mode="manual", manual_on=False) == (False, "manual")


def test_scenario_is_deterministic():
    text = json.dumps({"initial_moisture": 30, "duration_ticks": 200,
                       "sim": {"adc_noise_sd": 2, "seed": 3}})
    a = af.run_scenario(text)
    assert a["csv"] == af.run_scenario(text)["csv"]
    assert a["csv"].count("\n") == 201
    assert a["ticks_pump_on"] > 0


def test_pipeline_and_metrics():
    rows = af.synth_generate(100, 2)
    assert len(rows) == 100 and "Crop_Damage" in rows[0]
    scores = af.run_pipeline(3000, seed=1, models=["dt", "knn"])
    assert set(scores) == {"DT", "KNN"}
    assert scores["DT"]["accuracy"] >= 0.9
    ev = af.evaluate([0, 0, 1, 1], [0, 1, 1, 1])
    assert ev["accuracy"] == 0.75
    assert ev["per_class"][1]["f1"] == pytest.approx(0.8)
    assert af.gini([0, 1]) == pytest.approx(0.5)
