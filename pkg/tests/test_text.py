from datetime import datetime, timezone

from hypothesis import given
from hypothesis import strategies as st

from editnews.clock import format_instant, parse_instant
from editnews.text import split_sentences, tokenize


def test_tokenize():
    assert tokenize("Don't STOP, 2013's best_of!") == ["don't", "stop", "2013's", "best", "of"]
    assert tokenize("") == []


def test_split_sentences():
    assert split_sentences("A. B! C? D") == ["A.", "B!", "C?", "D"]
    assert split_sentences("Dr. Who") == ["Dr.", "Who"]  # no abbreviation handling
    assert split_sentences("3.5 inches fell.") == ["3.5 inches fell."]
    assert split_sentences("  ") == []


@given(st.datetimes(min_value=datetime(1970, 1, 1), timezones=st.just(timezone.utc)))
def test_instant_round_trip(dt):
    assert parse_instant(format_instant(dt)) == dt


def test_naive_instants_are_utc():
    assert format_instant(parse_instant("2013-05-20T12:00:00")) == "2013-05-20T12:00:00Z"
    assert format_instant(parse_instant("2013-05-20T14:00:00+02:00")) == "2013-05-20T12:00:00Z"
