"""excitonbench: four-site exciton transfer simulation workbench.

Reference hierarchy dynamics, stochastic noise-ensemble simulation,
gradient-ascent pulse compilation, and simulated two-spin readout for a
donor-pair / acceptor-pair chain model.
"""

__version__ = "0.1.0"
