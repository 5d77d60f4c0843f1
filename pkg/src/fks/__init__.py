"""fks: decide whether lattice extension data defines a flat Kähler
solvmanifold, and build its discrete model when it does.

The input is a group extension of one even-rank lattice by another, presented
by integer action matrices and commutator tails.  The engine checks the four
acceptance conditions (finite image, real one-parameter extension, invariant
complex structure, torsion extension class), and for accepted data produces
the virtually-abelian certificate, an invariant flat Kähler metric, the
torus-quotient and torus-bundle presentations, and topological invariants.
"""

__version__ = "0.1.0"
