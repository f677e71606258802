import pytest

from hecke_pairing.errors import NotInGamma0Error, NotInSubgroupError
from hecke_pairing.mat2 import IDENTITY, LevelContext, mat, named
from hecke_pairing.subgroups import (descriptor_of, enumerate_L_descriptors, in_G02, in_L02,
                                     in_gamma0, in_gamma02, in_gamma02_by_characters)
from oracles import brute_descriptors, in_gamma02_brute

C7 = LevelContext(7)


def test_gamma0_examples():
    assert in_gamma0(mat(2, 1, 7, 4), C7)
    assert in_gamma0(IDENTITY, C7)
    assert not in_gamma0(mat(2, -1, -5, 3), C7)


def test_gamma02_examples():
    assert in_gamma02(mat(2, 1, 7, 4), C7)
    assert in_gamma0(mat(3, 1, 14, 5), C7) and not in_gamma02(mat(3, 1, 14, 5), C7)
    assert in_gamma02(IDENTITY, LevelContext(9))


def test_character_oracle_examples():
    assert in_gamma02_by_characters(mat(2, 1, 7, 4), C7)
    assert not in_gamma02_by_characters(mat(3, 1, 14, 5), C7)
    assert in_gamma02_by_characters(IDENTITY, C7)
    with pytest.raises(NotInGamma0Error):
        in_gamma02_by_characters(mat(2, -1, -5, 3), C7)


def test_G02_examples():
    assert in_G02(mat(2, 1, 5, 3), LevelContext(5))
    assert in_G02(mat(1, 1, 0, 1), C7)
    assert not in_G02(mat(3, 1, 14, 5), C7)


def test_L02_examples():
    c3 = LevelContext(3)
    m2 = named("M2", c3)
    assert in_L02(m2, c3)
    assert descriptor_of(m2, c3).key == (1, -1, -1)
    assert descriptor_of(mat(4, 1, 3, 1), c3).key == (2, 1, 1)
    # (4,3,3,d) would need 4d - 9 = 1; any such matrix breaks |alpha| <= 2
    assert not in_L02(mat(4, 3, 3, 3), c3)
    with pytest.raises(NotInSubgroupError):
        descriptor_of(mat(4, 3, 3, 3), c3)


def test_enumerate_examples():
    c3 = LevelContext(3)
    one = [d.key for d in enumerate_L_descriptors(c3, 1)]
    assert sorted(one) == [(1, -1, -1), (1, -1, 1), (1, 1, -1), (1, 1, 1)]
    two = {d.key for d in enumerate_L_descriptors(c3, 2)}
    assert (2, 1, 1) in two and (2, 1, -1) not in two


@pytest.mark.parametrize("N", [3, 5, 7, 9, 11, 13, 15, 21, 29])
def test_enumerate_matches_brute_force(N):
    got = [d.key for d in enumerate_L_descriptors(LevelContext(N), 7)]
    assert len(got) == len(set(got))
    assert set(got) == brute_descriptors(N, 7)


def test_level_sizes():
    for N in (3, 5, 7):
        ctx = LevelContext(N)
        for n in range(2, 9):
            assert len([d for d in enumerate_L_descriptors(ctx, n) if d.n == n]) == 2 ** (n - 1)


def test_membership_chain_on_samples():
    for N in (3, 5, 7, 9, 15):
        ctx = LevelContext(N)
        for a in range(-20, 21):
            for b in range(-6, 7):
                for k in range(-3, 4):
                    c = k * N
                    if a == 0 or (1 + b * c) % a:
                        continue
                    m = mat(a, b, c, (1 + b * c) // a)
                    if in_L02(m, ctx):
                        assert in_G02(m, ctx)
                    if in_G02(m, ctx):
                        assert in_gamma02(m, ctx)
                    if in_gamma02(m, ctx):
                        assert in_gamma0(m, ctx)
                    assert in_gamma02(m, ctx) == in_gamma02_brute(m.entries, N)
