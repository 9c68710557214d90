"""blochpack: disk-analysis numerics around the Bergman projection.

Submodules
----------
geometry    hyperbolic distances, annulus radii, box grids, log coordinates
quadrature  adaptive integration for ds, dA and dA/(1-|z|^2)
symbols     bounded symbols and their Bergman projections
bloch       Bloch seminorm, growth bound, the field N_g
spectra     integral means, annular/box averages, variance, iteration checks
zeropack    the zero-packing functional and its polynomial optimization
cli         batch front end (see `blochpack --help`)
"""

__version__ = "0.1.0"
