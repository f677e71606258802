"""Seeded random elements of Gamma_0,2(N) as products of generators."""

import random

from .mat2 import IDENTITY, T, W
from .subgroups import enumerate_L_descriptors


def generator_alphabet(ctx, l_level=2):
    """T, T^-1, W, W^-1 and every L-element up to ``l_level``."""
    gens = [T(), T().inverse(), W(ctx), W(ctx).inverse()]
    gens.extend(d.matrix() for d in enumerate_L_descriptors(ctx, l_level))
    return gens


def random_elements(ctx, count, seed=0, max_len=12, l_level=2):
    """``count`` products of 0..max_len generators drawn uniformly."""
    rng = random.Random(seed)
    gens = generator_alphabet(ctx, l_level)
    out = []
    for _ in range(count):
        g = IDENTITY
        for _ in range(rng.randint(0, max_len)):
            g = g @ rng.choice(gens)
        out.append(g)
    return out
