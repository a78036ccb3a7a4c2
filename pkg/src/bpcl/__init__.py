"""bpcl: a desk-scale numerical laboratory for bi-parameter commutator bounds."""

__version__ = "0.1.0"
