import pytest

from hecke_pairing.errors import UnknownKeyError
from hecke_pairing.mat2 import IDENTITY, LevelContext, Mat2
from hecke_pairing.words import (GeneratorWord, cert_token, collapse, gen_token, inverse_tw,
                                 parse_token, replay, runs, word)

from oracles import tmul

CTX5 = LevelContext(5)


@pytest.mark.parametrize("kind,k,expected", [
    ("T", 0, ()), ("T", 1, ("T",)), ("W", -1, ("W-1",)), ("T", 7, ("T^7",)), ("W", -3, ("W^-3",)),
])
def test_gen_token(kind, k, expected):
    assert gen_token(kind, k) == expected


@pytest.mark.parametrize("tok,parsed", [
    ("T", ("T", 1)), ("W-1", ("W", -1)), ("T^-12", ("T", -12)), ("C(2,-1,-5,3)", ("C", "2,-1,-5,3")),
])
def test_parse_token(tok, parsed):
    assert parse_token(tok) == parsed


@pytest.mark.parametrize("bad", ["X", "T^", "C(1,2", "t", "W^1.5"])
def test_parse_token_rejects(bad):
    with pytest.raises(ValueError):
        parse_token(bad)


def test_word_rejects_bad_token():
    with pytest.raises(ValueError):
        GeneratorWord(("T", "Q"))


def test_replay_empty_and_cancelling():
    assert replay(GeneratorWord(), CTX5) == IDENTITY
    assert replay(word("T", "T-1"), CTX5) == IDENTITY


def test_replay_against_tuple_oracle():
    w = word("W", "T^3", "W^-2", "T-1")
    expected = (1, 0, 0, 1)
    for step in [(1, 0, 5, 1), (1, 3, 0, 1), (1, 0, -10, 1), (1, -1, 0, 1)]:
        expected = tmul(expected, step)
    assert replay(w, CTX5).entries == expected


def test_replay_certificate_needs_lookup():
    w = word(cert_token(Mat2(2, -1, -5, 3)))
    with pytest.raises(UnknownKeyError):
        replay(w, CTX5)
    assert replay(w, CTX5, Mat2.from_key_str) == Mat2(2, -1, -5, 3)


def test_collapse_merges_and_drops_runs():
    w = word("T", "T", "W", "W-1", "T-1", "C(1,1,0,1)", "W^3", "W")
    assert collapse(w).tokens == ("T", "C(1,1,0,1)", "W^4")
    assert runs(w) == [("T", 1), ("C", "1,1,0,1"), ("W", 4)]


def test_collapse_preserves_product():
    w = word("T^2", "W", "W", "T-1", "T-1", "W^-5")
    assert replay(collapse(w), CTX5) == replay(w, CTX5)


def test_inverse_tw():
    w = word("T^4", "W-1", "T")
    assert replay(w, CTX5) @ replay(inverse_tw(w), CTX5) == IDENTITY
    with pytest.raises(ValueError):
        inverse_tw(word("C(1,1,0,1)"))


def test_word_json_round_trip():
    w = word("W", cert_token(Mat2(2, -1, -5, 3)), "T")
    assert GeneratorWord(tuple(w.to_json())) == w
    assert w.cert_keys() == ["2,-1,-5,3"]
