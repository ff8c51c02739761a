"""Numerical laboratory for dyadic band decompositions and observability constants of wave and Schrodinger flows."""
