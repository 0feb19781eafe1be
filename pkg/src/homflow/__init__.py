"""Exact and certified computations for homogeneous flows.

Submodules: ``lie`` (structure constants), ``classify`` (flow
classification and decompositions), ``torus`` (invariant distributions and
cohomological equations on tori), ``keepaway`` and ``minimal_sets``
(orbits avoiding targets for hyperbolic toral maps), ``cli``.
"""

__version__ = "0.1.0"
