"""Numerical tolerances shared across the package."""

# Structural checks: reconstruction, completeness, normalization.
STRUCTURAL_ATOL = 1e-12

# Physical checks: positivity, purity, Bloch-ball membership.
PHYSICAL_ATOL = 1e-10

# Input Hermiticity accepted by pauli_decompose.
HERMITIAN_ATOL = 1e-10

# |λ| within this distance of 1 counts as a unit-modulus eigenvalue.
UNIT_EIGENVALUE_ATOL = 1e-9

# Model II field strengths closer than this to 1/2 use the critical branch.
CRITICAL_ALPHA_ATOL = 1e-12
