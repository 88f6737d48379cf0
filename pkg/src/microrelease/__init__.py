"""Release modeling for drug-loaded microparticles in a wound dressing.

Forward curves (particle, dressing, cascade), moment-matched Gamma
statistics of random particle sizes, Monte Carlo ensembles, and
least-squares calibration against measured release data.
"""
from ._backend import BACKEND_NAME
from .errors import (ConvergenceError, DataFormatError, DegenerateSizeError,
                     DomainError, InfeasibleError, InsufficientDataError,
                     ModelError, SupportMismatchError)
from .params import (GammaRateParams, SizeMoments, TimeSeries,
                     TransportParams, TruncationPolicy, check_cumulative)
from .quadrature import QuadratureSpec, integrate_composite_gl
from .kernels import (channel_cumulative, channel_rate, convolution_oracle,
                      effective_diffusion, end_to_end_release,
                      transmit_cumulative, transmit_rate)
from .sizestats import (mean_release, radius_moments, radius_pdf,
                        solve_gamma_params, variance_release)
from .montecarlo import (BinnedHistogram, SampleSet, apply_loading_hypothesis,
                         empirical_kld, ensemble_release, gaussian_histogram,
                         histogram_from_samples, read_histogram_csv,
                         sample_radii)
from .calibration import (ExperimentalDataset, FitResult, GridSearchSpec,
                          compare_models, fit_channel_only, fit_end_to_end,
                          fit_ritger_peppas, mse)
from .config import RunConfig, SensitivityConfig

__version__ = "0.1.0"
