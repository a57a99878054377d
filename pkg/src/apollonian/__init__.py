"""Exact and numerical machinery for integral Apollonian gaskets.

Submodules:
    core        exact Descartes/Apollonian-group arithmetic and the spin cover
    orbit       curvature enumeration, norm balls, the bilinear family
    congruence  finite quotients of the Apollonian group and admissibility
    forms       shifted binary quadratic forms and their coincidence counts
    expsums     local exponential sums, singular series, circle-method harness
    spectral    SL(2, Z[i]) quotients, generation length, Markov spectra
    cli         command-line reports and rendering
"""

__version__ = "0.1.0"
