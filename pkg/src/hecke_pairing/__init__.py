"""Exact relation engine for the Hecke-operator process on Gamma_0(N)."""

from .mat2 import IDENTITY, LevelContext, Mat2, det, inverse, is_integral, mat, mul, named
from .subgroups import (LElementDescriptor, descriptor_of, enumerate_L_descriptors, in_G02,
                        in_L02, in_gamma0, in_gamma02, in_gamma02_by_characters)
from .relations import (Certificate, FormalSum, KnowledgeBase, add, cancel_common,
                        conjugate_sum, equivalent_to, expand_second_order, hecke_T2,
                        mul_sum, seed_kb, sub)
from .process import (derive_base_case, enumerate_certified_L, pairing_candidates,
                      process_step, reduce_to_L, select_integral_pairing)
from .decompose import (ArtinWitness, DecomposeBounds, artin_search, decompose_G02,
                        decompose_Gamma02, replay)
from .words import GeneratorWord

__version__ = "0.1.0"
