import pytest
from hypothesis import given
from hypothesis import strategies as st

from prosody_gesture.emotion import QUADRANTS, EmotionPoint, Quadrant, centroid, quadrant_of

coord = st.floats(-1, 1, allow_nan=False)
nonzero = coord.filter(lambda x: x != 0)


@pytest.mark.parametrize("v, a, q", [
    (0.8, 0.7, Quadrant.HAPPY),
    (-0.5, 0.6, Quadrant.ANGRY),
    (-0.2, -0.9, Quadrant.SAD),
    (0.3, -0.1, Quadrant.CALM),
    (0.0, 0.0, Quadrant.HAPPY),
    (0.0, -0.5, Quadrant.CALM),
    (-0.5, 0.0, Quadrant.ANGRY),
])
def test_quadrant_of(v, a, q):
    assert quadrant_of(EmotionPoint(v, a)) is q


@pytest.mark.parametrize("q, xy", [
    (Quadrant.HAPPY, (0.5, 0.5)), (Quadrant.ANGRY, (-0.5, 0.5)),
    (Quadrant.SAD, (-0.5, -0.5)), (Quadrant.CALM, (0.5, -0.5)),
])
def test_centroids(q, xy):
    c = centroid(q)
    assert (c.valence, c.arousal) == xy
    assert quadrant_of(c) is q


def test_clamped_at_construction():
    p = EmotionPoint(3.0, -7.5)
    assert (p.valence, p.arousal) == (1.0, -1.0)


def test_four_quadrants_bijective_with_sign_pairs():
    assert len(set(QUADRANTS)) == 4
    signs = {quadrant_of(EmotionPoint(v, a)) for v in (-1, 1) for a in (-1, 1)}
    assert signs == set(QUADRANTS)


@given(coord, coord)
def test_total(v, a):
    assert quadrant_of(EmotionPoint(v, a)) in QUADRANTS


@given(nonzero, nonzero)
def test_sign_flips(v, a):
    swap_v = {Quadrant.HAPPY: Quadrant.ANGRY, Quadrant.ANGRY: Quadrant.HAPPY,
              Quadrant.CALM: Quadrant.SAD, Quadrant.SAD: Quadrant.CALM}
    swap_a = {Quadrant.HAPPY: Quadrant.CALM, Quadrant.CALM: Quadrant.HAPPY,
              Quadrant.ANGRY: Quadrant.SAD, Quadrant.SAD: Quadrant.ANGRY}
    q = quadrant_of(EmotionPoint(v, a))
    assert quadrant_of(EmotionPoint(-v, a)) is swap_v[q]
    assert quadrant_of(EmotionPoint(v, -a)) is swap_a[q]


@pytest.mark.parametrize("label", ["happy", " Sad ", "CALM"])
def test_parse(label):
    assert Quadrant.parse(label).value == label.strip().lower()


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Quadrant.parse("bored")
