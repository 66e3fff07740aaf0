import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formfunc.arithmetic import (
    ClassEssence,
    CombineRequest,
    ImportanceVector,
    class_essence,
    combine,
    gaussian_kl,
    importance_mask,
    importance_vector,
    nearest_in_dataset,
)
from formfunc.model import LatentCode, ModelConfig, build_model


def random_code(rng, j=6):
    return LatentCode(rng.normal(size=j), rng.uniform(-2, 2, j))


def essence_oracle(codes):
    """Independent straight-line summation of means and variances."""
    j = len(codes[0])
    mean_sum = np.zeros(j)
    var_sum = np.zeros(j)
    for c in codes:
        mean_sum += c.means
        var_sum += np.exp(c.log_variances)
    return mean_sum / len(codes), var_sum / len(codes)


def test_essence_of_one_is_identity():
    rng = np.random.default_rng(0)
    c = random_code(rng)
    e = class_essence([c], "solo")
    assert np.allclose(e.code.means, c.means)
    assert np.allclose(e.code.variances, c.variances)
    assert e.sample_count == 1


def test_essence_of_two_averages_means():
    a = LatentCode(np.array([1.0, 2.0]), np.zeros(2))
    b = LatentCode(np.array([3.0, 6.0]), np.zeros(2))
    e = class_essence([a, b])
    assert np.allclose(e.code.means, [2.0, 4.0])


def test_essence_matches_summation_oracle():
    rng = np.random.default_rng(1)
    codes = [random_code(rng, 8) for _ in range(50)]
    e = class_essence(codes, "x")
    mean_o, var_o = essence_oracle(codes)
    assert np.allclose(e.code.means, mean_o, atol=1e-12)
    assert np.allclose(e.code.variances, var_o, atol=1e-12)


def test_essence_permutation_invariant():
    rng = np.random.default_rng(2)
    codes = [random_code(rng) for _ in range(10)]
    e1 = class_essence(codes)
    e2 = class_essence(list(reversed(codes)))
    assert np.allclose(e1.code.means, e2.code.means)
    assert np.allclose(e1.code.log_variances, e2.code.log_variances)


def test_essence_errors():
    with pytest.raises(ValueError):
        class_essence([])
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        class_essence([random_code(rng, 4), random_code(rng, 5)])
    with pytest.raises(ValueError):
        ClassEssence(random_code(rng), "x", 0)


def test_gaussian_kl_zero_for_identical():
    assert gaussian_kl((0.3, 2.0), (0.3, 2.0)) == pytest.approx(0.0, abs=1e-15)


def test_gaussian_kl_unit_shift():
    assert gaussian_kl((0.0, 1.0), (1.0, 1.0)) == pytest.approx(0.5, rel=1e-12)


def test_gaussian_kl_asymmetry():
    # closed form: 0.5*log(vq/vp) + (vp + (mp-mq)^2)/(2 vq) - 0.5
    forward = gaussian_kl((0.0, 1.0), (0.0, 4.0))
    backward = gaussian_kl((0.0, 4.0), (0.0, 1.0))
    assert forward == pytest.approx(0.5 * math.log(4) + 1 / 8 - 0.5, rel=1e-12)
    assert backward == pytest.approx(0.5 * math.log(0.25) + 2 - 0.5, rel=1e-12)
    assert forward != pytest.approx(backward)


def test_gaussian_kl_rejects_bad_variance():
    with pytest.raises(ValueError):
        gaussian_kl((0.0, 0.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        gaussian_kl((0.0, 1.0), (0.0, -2.0))


@settings(max_examples=250, deadline=None)
@given(
    mp=st.floats(-4, 4), vp=st.floats(0.01, 10),
    mq=st.floats(-4, 4), vq=st.floats(0.01, 10),
)
def test_gaussian_kl_nonnegative(mp, vp, mq, vq):
    k = gaussian_kl((mp, vp), (mq, vq))
    assert k >= -1e-12
    if abs(mp - mq) > 1e-6 or abs(vp - vq) > 1e-6:
        assert k > 0


def importance_oracle(code, void_code, w_void, w_prior):
    """Re-computation with scalar gaussian_kl per component."""
    j = len(code)
    d_void = np.array(
        [
            gaussian_kl(
                (code.means[i], code.variances[i]),
                (void_code.means[i], void_code.variances[i]),
            )
            for i in range(j)
        ]
    )
    d_prior = np.array(
        [gaussian_kl((code.means[i], code.variances[i]), (0.0, 1.0)) for i in range(j)]
    )
    for d in (d_void, d_prior):
        n = np.linalg.norm(d)
        if n > 0:
            d /= n
    return w_void * d_void + w_prior * d_prior


def test_importance_vector_matches_oracle():
    rng = np.random.default_rng(4)
    code, void = random_code(rng, 8), random_code(rng, 8)
    iv = importance_vector(code, void)
    expected = importance_oracle(code, void, 2 / 3, 1 / 3)
    assert np.allclose(iv.scores, expected, atol=1e-12)


def test_importance_self_void_leaves_prior_term():
    rng = np.random.default_rng(5)
    code = random_code(rng, 6)
    iv = importance_vector(code, code)
    expected = (1 / 3) * importance_oracle(code, code, 0.0, 1.0)
    assert np.allclose(iv.scores, expected, atol=1e-12)


def test_importance_prior_code_leaves_void_term():
    rng = np.random.default_rng(6)
    code = LatentCode(np.zeros(6), np.zeros(6))  # exactly the prior
    void = random_code(rng, 6)
    iv = importance_vector(code, void)
    expected = (2 / 3) * importance_oracle(code, void, 1.0, 0.0)
    assert np.allclose(iv.scores, expected, atol=1e-12)


def test_importance_length_mismatch():
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError):
        importance_vector(random_code(rng, 4), random_code(rng, 5))


def test_importance_json_round_trip():
    iv = ImportanceVector(np.array([0.1, 0.9, 0.3]))
    back = ImportanceVector.from_json_dict(iv.to_json_dict())
    assert np.array_equal(back.scores, iv.scores)
    assert back.w_void == iv.w_void


def test_mask_extremes():
    iv = ImportanceVector(np.array([0.5, 0.1, 0.9]))
    assert importance_mask(iv, 1.0).all()
    assert not importance_mask(iv, 0.0).any()


def test_mask_documented_example():
    iv = ImportanceVector(np.array([1.0, 4.0, 2.0, 3.0]))
    assert list(importance_mask(iv, 0.5)) == [False, True, False, True]


def test_mask_ties_prefer_lower_index():
    iv = ImportanceVector(np.array([1.0, 1.0, 1.0, 1.0]))
    assert list(importance_mask(iv, 0.5)) == [True, True, False, False]


@settings(max_examples=150, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    j=st.integers(1, 32),
    percent=st.floats(0.0, 1.0),
)
def test_mask_cardinality(seed, j, percent):
    rng = np.random.default_rng(seed)
    iv = ImportanceVector(rng.random(j))
    assert importance_mask(iv, percent).sum() == math.ceil(percent * j)


def iv_with_mask(mask):
    """Importance scores whose top-half mask equals the given booleans."""
    mask = np.asarray(mask, dtype=bool)
    scores = np.where(mask, 1.0, 0.0) + np.linspace(0.01, 0.0, len(mask))
    return ImportanceVector(scores)


def combine_oracle(base, top, base_mask, top_mask):
    """Per-component four-case rule, straight-line."""
    means, variances = [], []
    for j in range(len(base)):
        b, t = base_mask[j], top_mask[j]
        if not b and t:
            means.append(top.means[j])
            variances.append(top.variances[j])
        elif b and t:
            means.append((base.means[j] + top.means[j]) / 2)
            variances.append((base.variances[j] + top.variances[j]) / 2)
        else:
            means.append(base.means[j])
            variances.append(base.variances[j])
    return np.array(means), np.array(variances)


def test_combine_all_false_returns_base():
    rng = np.random.default_rng(8)
    base, top = random_code(rng), random_code(rng)
    out = combine(CombineRequest(base, top, 0.0, 0.0), iv_with_mask([0] * 6), iv_with_mask([0] * 6))
    assert np.allclose(out.means, base.means)
    assert np.allclose(out.variances, base.variances)


def test_combine_top_only_returns_top():
    rng = np.random.default_rng(9)
    base, top = random_code(rng), random_code(rng)
    out = combine(CombineRequest(base, top, 0.0, 1.0), iv_with_mask([0] * 6), iv_with_mask([1] * 6))
    assert np.allclose(out.means, top.means)
    assert np.allclose(out.variances, top.variances)


def test_combine_both_important_averages():
    rng = np.random.default_rng(10)
    base, top = random_code(rng), random_code(rng)
    out = combine(CombineRequest(base, top, 1.0, 1.0), iv_with_mask([1] * 6), iv_with_mask([1] * 6))
    assert np.allclose(out.means, (base.means + top.means) / 2)
    assert np.allclose(out.variances, (base.variances + top.variances) / 2)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31), j=st.integers(1, 24))
def test_combine_matches_case_oracle(seed, j):
    rng = np.random.default_rng(seed)
    base = LatentCode(rng.normal(size=j), rng.uniform(-2, 2, j))
    top = LatentCode(rng.normal(size=j), rng.uniform(-2, 2, j))
    base_mask = rng.random(j) < 0.5
    top_mask = rng.random(j) < 0.5
    out = combine(
        CombineRequest(base, top, base_mask.mean(), top_mask.mean()),
        iv_with_mask(base_mask),
        iv_with_mask(top_mask),
    )
    # percent is mask density; regenerate exact masks for the oracle
    from formfunc.arithmetic import importance_mask as im

    bm = im(iv_with_mask(base_mask), base_mask.mean())
    tm = im(iv_with_mask(top_mask), top_mask.mean())
    mo, vo = combine_oracle(base, top, bm, tm)
    assert np.array_equal(out.means, mo)
    assert np.allclose(out.variances, vo, rtol=1e-12)


def test_combine_non_commutative_construction():
    # component 0 unimportant on both sides: the base object wins there,
    # so swapping roles changes the outcome
    base = LatentCode(np.array([1.0, 9.0]), np.zeros(2))
    top = LatentCode(np.array([2.0, 9.0]), np.zeros(2))
    base_iv = iv_with_mask([0, 1])
    top_iv = iv_with_mask([0, 1])
    fwd = combine(CombineRequest(base, top, 0.5, 0.5), base_iv, top_iv)
    rev = combine(CombineRequest(top, base, 0.5, 0.5), top_iv, base_iv)
    assert fwd.means[0] == 1.0
    assert rev.means[0] == 2.0
    assert not np.allclose(fwd.means, rev.means)


def test_combine_idempotent_on_identical_inputs():
    rng = np.random.default_rng(13)
    c = random_code(rng)
    iv = ImportanceVector(rng.random(6))
    out = combine(CombineRequest(c, c, 0.5, 0.5), iv, iv)
    assert np.allclose(out.means, c.means)
    assert np.allclose(out.variances, c.variances)


def test_combine_request_validates_percent():
    rng = np.random.default_rng(14)
    with pytest.raises(ValueError):
        CombineRequest(random_code(rng), random_code(rng), -0.1, 0.5)


def test_nearest_in_dataset_exact_and_ordered():
    model = build_model(ModelConfig(8, 8, (2, 4)), seed=0)
    rng = np.random.default_rng(15)
    codes = [random_code(rng, 8) for _ in range(20)]
    query = codes[7]
    ranked = nearest_in_dataset(query, codes, model, k=len(codes))
    assert ranked[0][0] == 7
    assert ranked[0][1] == pytest.approx(0.0, abs=1e-9)
    dists = [d for _, d in ranked]
    assert dists == sorted(dists)

    # brute-force oracle over decoder features
    from formfunc.model import decode_features

    q = decode_features(model, query.means)
    brute = sorted(
        (float(np.linalg.norm(decode_features(model, c.means) - q)), i)
        for i, c in enumerate(codes)
    )
    assert [i for _, i in brute] == [i for i, _ in ranked]


def test_nearest_in_dataset_errors():
    model = build_model(ModelConfig(8, 8, (2, 4)), seed=0)
    rng = np.random.default_rng(16)
    with pytest.raises(ValueError):
        nearest_in_dataset(random_code(rng, 8), [], model)
    with pytest.raises(ValueError):
        nearest_in_dataset(random_code(rng, 8), [random_code(rng, 8)], model, k=2)
