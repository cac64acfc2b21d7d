"""
cprover: exact verification of the curvature-jet identities behind the
positivity argument for Δ^{ω+1}scal.

- expr / canon / rules: index-notation monomials, canonical forms, rewriting
- reduce: elimination onto the invariant basis R_0, T_ℓ, M_ℓ, N_ℓ
- comb: closed-form coefficients and combinatorial identities
- oracle: numeric cross-checks on random constrained jets
- proofs: one verifier per step of the argument, plus the dispatcher
"""

__version__ = "0.1.0"
