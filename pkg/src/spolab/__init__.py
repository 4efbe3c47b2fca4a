"""spolab: an exact desk-scale verification lab for superposition permutation
oracles, their twirled variants, and the query bounds built on them."""

__version__ = "0.1.0"
