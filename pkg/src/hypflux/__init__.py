"""Flux-twisted trace formulas on compact hyperbolic surfaces.

Length spectra of surface groups, the geometric side of the twisted Laplace
and Dirac trace formulas, exact flux averages of the smoothed counting
function, and random-matrix reference ensembles.
"""

from .errors import (ConfigError, CorruptRecord, CutoffTooLarge, FormatVersionMismatch,
                     HypfluxError, IncompleteSpectrum, InvalidFluxSpec, InvalidGenerators,
                     InvariantViolation, NotHyperbolic, QuadratureFailure, TrivialWord)
from .flux import (INF, FluxSpec, FluxVector, char_eval, is_real_character, ker_q, pairing_ok,
                   q_star, sample_flux)
from .geodesics import (GeodesicClass, LengthSpectrum, check_spectrum, enumerate_by_words,
                        enumerate_classes, power_extend, read_spectrum, write_spectrum)
from .kernels import (TestFunction, WindowParams, h_window, hhat_window, i_fq, make_bump,
                      rmt_density, weyl_term)
from .rmt import EnsembleSpec, sample_spectrum, statistic_variance, unfold
from .surface_group import (BOLZA_SYSTOLE, GeneratorSet, abelianize, bolza, cyclic_normal_form,
                            dehn_reduce, is_primitive, sigma_sign, validate_generators,
                            word_to_matrix)
from .trace import (OperatorKind, StatReport, counting_estimate, exact_theta_mean,
                    exact_theta_variance, geometric_side, mc_flux_experiment)

__version__ = "0.1.0"
