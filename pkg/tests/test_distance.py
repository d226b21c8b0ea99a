import math

import numpy as np
import pytest

import oracles
from ammd import (DegenerateInputError, DescriptorSequence, Feature, MeasureKind, SnippetDescriptor,
                  ammd, cmlp_distance, decompose, describe, dtw_distance, manifold_distance, mdd,
                  mmd_closest_pair, mmd_equal_weight, mpd)
from ammd.classifier import describe_sequence
from ammd.geometry import ConfigError, PostureSequence

D = 45
e = np.eye(D)


def desc(mean, direction=None):
    direction = np.zeros(D) if direction is None else np.asarray(direction, float)
    return SnippetDescriptor(np.asarray(mean, float), direction, 3)


def random_desc(rng, flat_prob=0.15):
    mean = rng.normal(size=D) + 2.0
    if rng.random() < flat_prob:
        return desc(mean)
    v = rng.normal(size=D)
    return desc(mean, v / np.linalg.norm(v))


def random_seq(rng, n):
    return DescriptorSequence([random_desc(rng) for _ in range(n)])


def test_mpd_examples():
    a = desc(e[0])
    assert mpd(a, a) == 0.0
    assert mpd(a, desc(e[1])) == 1.0
    assert mpd(a, desc(e[0] + e[1])) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert mpd(desc(3 * e[0] + e[2]), desc(e[0] - e[4])) == pytest.approx(
        mpd(desc(e[0] - e[4]), desc(3 * e[0] + e[2])), abs=1e-15)


def test_mpd_zero_mean_is_an_error():
    with pytest.raises(DegenerateInputError):
        mpd(desc(np.zeros(D)), desc(e[0]))


def test_mdd_examples(rng):
    v = rng.normal(size=D)
    v /= np.linalg.norm(v)
    assert mdd(desc(e[0], v), desc(e[1], v)) == 0.0
    assert mdd(desc(e[0], v), desc(e[1], -v)) == 0.0
    assert mdd(desc(e[0], e[2]), desc(e[1], e[3])) == 1.0
    assert mdd(desc(e[0]), desc(e[1], e[3])) == 0.0


def test_cmlp_distance_examples():
    a = desc(e[0], e[2])
    assert cmlp_distance(a, a) == 0.0
    assert cmlp_distance(a, desc(e[1], e[3])) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert cmlp_distance(a, desc(2 * e[0], e[3])) == pytest.approx(1.0, abs=1e-12)


def test_patch_distances_match_cosine_form(rng):
    for _ in range(200):
        a, b = random_desc(rng), random_desc(rng)
        assert cmlp_distance(a, b) == pytest.approx(oracles.dc(a, b), abs=1e-7)
        assert 0 <= mpd(a, b) <= 1 and 0 <= mdd(a, b) <= 1
        assert 0 <= cmlp_distance(a, b) <= math.sqrt(2)
        assert cmlp_distance(a, b) == cmlp_distance(b, a)


@pytest.mark.parametrize("feature", list(Feature))
def test_manifold_distances_match_enumeration(backend, rng, feature):
    f = feature.value
    for _ in range(60):
        R, T = random_seq(rng, int(rng.integers(1, 7))), random_seq(rng, int(rng.integers(1, 7)))
        assert ammd(R, T, feature) == pytest.approx(oracles.ammd(R, T, f), abs=1e-7)
        assert mmd_equal_weight(R, T, feature) == pytest.approx(oracles.equal_weight(R, T, f), abs=1e-7)
        assert mmd_closest_pair(R, T, feature) == pytest.approx(oracles.closest(R, T, f), abs=1e-7)
        assert dtw_distance(R, T, feature) == pytest.approx(oracles.dtw(R, T, f), abs=1e-7)


def test_ammd_identical_is_zero(backend, rng):
    for n in range(2, 8):
        T = random_seq(rng, n)
        assert ammd(T, T) == 0.0
        assert dtw_distance(T, T) == 0.0


def test_ammd_n2_single_term(backend, rng):
    R, T = random_seq(rng, 5), random_seq(rng, 2)
    terms = [cmlp_distance(R[i], T[0]) + cmlp_distance(R[i + 1], T[1]) for i in range(4)]
    assert ammd(R, T) == pytest.approx(min(terms), abs=1e-12)


def test_ammd_degenerate_lengths(backend, rng):
    R, T1 = random_seq(rng, 4), random_seq(rng, 1)
    assert ammd(R, T1) == pytest.approx(min(cmlp_distance(r, T1[0]) for r in R), abs=1e-12)
    R1, T = random_seq(rng, 1), random_seq(rng, 4)
    expected = sum(cmlp_distance(R1[0], T[j]) + cmlp_distance(R1[0], T[j + 1]) for j in range(3))
    assert ammd(R1, T) == pytest.approx(expected, abs=1e-12)
    assert ammd(R1, T1) == pytest.approx(cmlp_distance(R1[0], T1[0]), abs=1e-12)


def test_baselines_small_cases(rng):
    a = random_desc(rng)
    b = random_desc(rng)
    A, B = DescriptorSequence([a]), DescriptorSequence([b])
    assert mmd_equal_weight(A, A) == 0.0
    assert mmd_equal_weight(A, B) == pytest.approx(cmlp_distance(a, b), abs=1e-12)
    assert mmd_closest_pair(A, B) == pytest.approx(cmlp_distance(a, b), abs=1e-12)
    assert dtw_distance(A, B) == pytest.approx(cmlp_distance(a, b), abs=1e-12)
    R = DescriptorSequence([random_desc(rng), a, random_desc(rng)])
    T = DescriptorSequence([random_desc(rng), random_desc(rng), a, random_desc(rng)])
    assert mmd_closest_pair(R, T) == 0.0


def test_dtw_two_by_three_hand_built():
    R = [desc(e[0], e[2]), desc(e[1], e[3])]
    T = [desc(e[0], e[2]), desc(e[0] + e[1], e[2]), desc(e[1], e[3])]
    # enumerate the five monotone paths of a 2x3 grid by hand via the oracle
    want = oracles.dtw(R, T)
    assert dtw_distance(R, T) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(math.sqrt(2) / 2, abs=1e-12)


def test_symmetry(rng):
    for _ in range(30):
        R, T = random_seq(rng, int(rng.integers(1, 7))), random_seq(rng, int(rng.integers(1, 7)))
        for f in (mmd_equal_weight, mmd_closest_pair, dtw_distance):
            assert f(R, T) == pytest.approx(f(T, R), abs=1e-12)


def test_order_sensitivity(rng):
    changed = 0
    for _ in range(30):
        R, T = random_seq(rng, 5), random_seq(rng, 5)
        Tr = T.reversed()
        assert mmd_equal_weight(R, Tr) == pytest.approx(mmd_equal_weight(R, T), abs=1e-12)
        assert mmd_closest_pair(R, Tr) == pytest.approx(mmd_closest_pair(R, T), abs=1e-12)
        changed += abs(ammd(R, Tr) - ammd(R, T)) > 1e-9
    assert changed > 0
    # a constructed case: the test is the reference, reversed
    R = random_seq(rng, 4)
    assert ammd(R, R) == 0.0 and ammd(R, R.reversed()) > 0.1


def _two_sequences(rng):
    seqs = [oracles.smooth_sequence(rng, 70, dims=D, noise=0.05) for _ in range(2)]
    return seqs


def test_distances_invariant_to_scale_and_rotation(rng):
    for _ in range(5):
        A, B = _two_sequences(rng)
        Q = oracles.random_orthogonal(rng, D)

        def dists(A, B):
            R = describe_sequence(PostureSequence(A), 1.04, 3)
            T = describe_sequence(PostureSequence(B), 1.04, 3)
            return [ammd(R, T), mmd_equal_weight(R, T), mmd_closest_pair(R, T), dtw_distance(R, T)]

        base = dists(A, B)
        np.testing.assert_allclose(dists(2.5 * A, 2.5 * B), base, rtol=1e-9)
        np.testing.assert_allclose(dists(A @ Q.T, B @ Q.T), base, rtol=1e-9)


def test_mdd_only_ignores_zero_means():
    R = DescriptorSequence([desc(np.zeros(D), e[0]), desc(np.zeros(D), e[1])])
    assert ammd(R, R, Feature.MDD) == 0.0
    with pytest.raises(DegenerateInputError):
        ammd(R, R, Feature.COMBINED)


def test_measure_parsing():
    assert str(MeasureKind.parse("combined-ammd")) == "combined-ammd"
    assert MeasureKind.parse("mpdxdtw") == MeasureKind(Feature.MPD, MeasureKind.parse("mpd-dtw").matcher)
    assert str(MeasureKind.parse("MDD:closest")) == "mdd-closest"
    with pytest.raises(ConfigError):
        MeasureKind.parse("cosine-ammd")


def test_manifold_distance_dispatch(rng):
    R, T = random_seq(rng, 4), random_seq(rng, 3)
    assert manifold_distance(R, T, MeasureKind.parse("mpd-equal")) == mmd_equal_weight(R, T, Feature.MPD)
    assert manifold_distance(R, T) == ammd(R, T)


def test_describe_roundtrip_through_decompose(rng):
    X = oracles.smooth_sequence(rng, 50, dims=D)
    patches = decompose(X, 1.04, 2)
    ds = DescriptorSequence([describe(p) for p in patches])
    assert len(ds) == len(patches)
