"""End-to-end smoke tests for the Python surface of the compiled core."""

import math

import pytest

import adpr


BOUNDS = adpr.bounds(0.0, 100.0, 0.0, 100000.0)
SEED = bytes(range(32))


def test_fixedq_arithmetic():
    three = adpr.FixedQ.from_decimal("1.5") * adpr.FixedQ.from_int(2)
    assert float(three) == 3.0
    assert adpr.FixedQ.from_rational(1, 4).raw == 1 << 30
    q = adpr.FixedQ.from_int(1) / adpr.FixedQ.from_int(3)
    assert abs(float(q) - 1.0 / 3.0) < 2.0**-32
    assert float(abs(-adpr.FixedQ(2.5))) == 2.5

    with pytest.raises(adpr.Error):
        adpr.FixedQ.from_raw(1 << 62) + adpr.FixedQ.from_raw(1 << 62)
    with pytest.raises(adpr.Error):
        adpr.FixedQ.from_int(1) / adpr.FixedQ.from_int(0)
    with pytest.raises(adpr.Error):
        adpr.ln(adpr.FixedQ.from_int(0))

    assert abs(float(adpr.ln(adpr.FixedQ.from_int(2))) - math.log(2)) < 2.0**-28


def test_generate_fit_and_recover():
    data = adpr.gen_synthetic(
        n=4000, seed=11, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )
    assert len(data) == 4000
    acc = adpr.ingest_dataset(data)
    model = adpr.ols_fit(acc)
    raw = adpr.denormalize(model, BOUNDS)
    assert abs(float(raw.slope) - 600.0) < 60.0
    assert abs(float(raw.intercept) - 20000.0) < 2000.0

    stats = adpr.metrics(model, data)
    assert stats["mse"] >= 0.0
    assert stats["mae"] >= 0.0


def test_noisy_fit_consumes_three_draws():
    data = adpr.gen_synthetic(
        n=2000, seed=3, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )
    params = adpr.PrivacyParams(adpr.FixedQ.from_int(2), SEED)
    model, draws = adpr.noisystats_fit(adpr.ingest_dataset(data), params)
    assert not model.failed
    assert model.noisy
    assert draws == 3

    plain = adpr.ols_fit(adpr.ingest_dataset(data))
    assert abs(float(model.slope) - float(plain.slope)) < 0.2


def test_prove_verify_and_tamper():
    data = adpr.gen_synthetic(
        n=800, seed=5, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )
    blob = adpr.load_blob(adpr.pack_blob(data))
    params = adpr.PrivacyParams(adpr.FixedQ.from_int(2), SEED)
    receipt = adpr.prove(blob, params)
    assert receipt.trace_len == 801
    assert receipt.num_openings == adpr.query_count(801)

    result = adpr.verify(receipt, blob)
    assert result.ok
    assert bool(result)

    other = adpr.load_blob(adpr.pack_blob(adpr.gen_synthetic(
        n=800, seed=6, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )))
    rejected = adpr.verify(receipt, other)
    assert not rejected.ok
    assert rejected.reason == "dataset-digest"

    text = adpr.receipt_to_json(receipt)
    round_tripped = adpr.receipt_from_json(text)
    assert adpr.verify(round_tripped, blob).ok


def test_receipt_json_tamper_rejected():
    data = adpr.gen_synthetic(
        n=100, seed=9, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )
    blob = adpr.load_blob(adpr.pack_blob(data))
    receipt = adpr.prove(blob, adpr.PrivacyParams(adpr.FixedQ.from_int(2), SEED))
    text = adpr.receipt_to_json(receipt)
    mangled = text.replace('"n": 100', '"n": 101')
    assert mangled != text
    tampered = adpr.receipt_from_json(mangled)
    result = adpr.verify(tampered, blob)
    assert not result.ok
    assert result.reason == "journal-digest"


def test_batching_and_aggregation():
    plan = adpr.plan_batches(50000, 1400)
    assert len(plan.batches) == 36
    assert plan.batches[-1].length == 1000

    data = adpr.gen_synthetic(
        n=300, seed=21, slope=600.0, intercept=20000.0, noise_sd=3000.0,
        bounds=BOUNDS,
    )
    params = adpr.PrivacyParams(adpr.FixedQ.from_int(2), SEED)
    outcomes = adpr.prove_all(data, params, adpr.plan_batches(300, 100), jobs=2)
    assert len(outcomes) == 3
    for outcome in outcomes:
        assert outcome.error == ""
        inner = adpr.load_blob(outcome.blob_bytes)
        assert adpr.verify(outcome.receipt, inner).ok

    model, used, skipped = adpr.aggregate_outcomes(outcomes)
    assert used == 3
    assert skipped == 0
    assert not model.failed

    single = adpr.aggregate([model])
    assert single.slope.raw == model.slope.raw


def test_progression_rows():
    data = adpr.gen_synthetic(
        n=200, seed=31, slope=600.0, intercept=20000.0, noise_sd=0.0,
        bounds=BOUNDS,
    )
    params = adpr.PrivacyParams(adpr.FixedQ.from_int(2), SEED)
    rows = adpr.progression_report(data, params, adpr.plan_batches(200, 50))
    assert len(rows) == 4
    for row in rows:
        assert abs(row["slope"] - 600.0) < 0.1
        assert 0.0 <= row["batch_mean_x"] <= 100.0


def test_query_count_law():
    assert adpr.query_count(1) == 1
    assert adpr.query_count(1024) == 10
    assert adpr.query_count(1401) == 11
    assert adpr.query_count(10**7) == 24


def test_backends():
    assert adpr.DEFAULT_BACKEND == "transcript-v1"
    assert "transcript-v1" in adpr.backend_ids()
