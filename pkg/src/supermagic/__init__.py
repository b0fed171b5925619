"""Exact-arithmetic workbench for modular Lie superalgebras over GF(p).

Builds the split composition (super)algebras, the supermagic square
g(S, S'), cubic Jordan algebras, (ortho)symplectic and orthogonal triple
systems, and the exceptional simple models el(5;3), br(2;3) and br(2;5),
and verifies their identities, dimensions, simplicity and Cartan data
exhaustively over prime fields.
"""

__version__ = "0.1.0"
