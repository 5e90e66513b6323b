"""Irrigation control, fertilizer dosing and crop-damage classifiers."""

from ._core import (
    ControllerConfig,
    DoseRecommendation,
    NutrientProfile,
    adc_to_moisture,
    crc16,
    decide,
    decode_frame,
    deficit,
    encode_read_request,
    evaluate,
    gini,
    moisture_to_adc,
    recommend_doses,
    run_pipeline,
    run_scenario,
    slave_respond,
    synth_generate,
)

__all__ = [
    "ControllerConfig",
    "DoseRecommendation",
    "NutrientProfile",
    "adc_to_moisture",
    "crc16",
    "decide",
    "decode_frame",
    "deficit",
    "encode_read_request",
    "evaluate",
    "gini",
    "moisture_to_adc",
    "recommend_doses",
    "run_pipeline",
    "run_scenario",
    "slave_respond",
    "synth_generate",
]
