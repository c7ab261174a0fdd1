"""Exact symbolic engine plus numeric oracle for the boundary part of a
noncommutative residue on a six-dimensional manifold with boundary.

The boundary density of the residue trace of pi+ D^{-1} . pi+ D^{-3}, for a
Dirac-type operator twisted by an orthogonal product structure J, splits into
five cases indexed by which covariable/coordinate derivatives land on which
symbol.  Each case is an integral over the normal covariable (a contour
residue), the unit sphere of tangential covariables (exact moments), and a
Clifford trace of a product of operator symbols specialized at a boundary
point in normal coordinates.

Layering, bottom up:

  scalar    exact coefficient ring: rationals extended by powers of pi,
            and the Gaussian rationals Q[i]
  clifford  Clifford word algebra, literal reduction, pairing trace
  tensor    indexed symbols a, da, nabla-J, h'(0); canonicalization,
            relation rewriting, numeric evaluation
  ratxi     rational functions of the normal covariable with poles at +-i;
            projection, derivative, line integral by residues
  sphere    exact surface moments of tangential monomials
  symbols   operator-symbol constructors at the boundary point and the
            composition-formula verifier
  boundary  the five-case pipeline, case sums, and target comparison
  oracle    matrix Clifford representation, random structure instances,
            quadrature, end-to-end numeric re-evaluation
  report    run configuration, verification report, markdown/JSON output
"""

__version__ = "0.1.0"
