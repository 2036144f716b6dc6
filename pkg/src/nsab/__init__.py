"""nsab: spectral Galerkin laboratory for a two-length-scale regularized
channel-flow model with wall-eddy boundary conditions.

Modules map one-to-one onto the solver stages: parameters and geometry
(params), wall-normal bases (basis), divergence-free fields (field),
per-wavenumber forms (operators), exact symbol checks (polynomial, adn),
stationary solves (stationary, manufactured), spectra and coercivity
(spectral), time integration (evolution), and the CLI layer (config,
snapshots, cli).
"""

__version__ = "0.1.0"

from .params import ChannelGeometry, ModelParams, ParameterError, Resolution, derive_params

__all__ = [
    "ChannelGeometry", "ModelParams", "ParameterError", "Resolution",
    "derive_params", "__version__",
]
