"""metamix: random-effects meta-analysis with exact normal-mixture posteriors.

The Bayesian engine computes the marginal effect posterior as an explicit
weighted normal mixture via quadrature over the heterogeneity scale, alongside
the frequentist estimates it is usually compared with (common-effect,
DerSimonian-Laird, REML, Q-profile, Hartung-Knapp-Sidik-Jonkman).
"""

from .analysis import (
    AnalysisConfig,
    AnalysisReport,
    emit_report,
    format_effect_prior,
    format_tau_prior,
    parse_effect_prior,
    parse_tau_prior,
    run_analysis,
    run_sensitivity,
)
from .bayes import (
    NormalMixture,
    PosteriorSummary,
    TauPosterior,
    build_tau_posterior,
    conditional_mu_moments,
    credible_interval,
    mixture_cdf,
    mixture_density,
    mixture_quantile,
    moment_matched_normal,
    mu_marginal_mixture,
    predictive_mixture,
    shrinkage_mixture,
    tau_posterior_summary,
)
from .csvio import parse_csv, parse_csv_text
from .data import CountTable, Dataset, Study, log_or_from_counts, subset_last
from .errors import (
    BracketError,
    ConvergenceError,
    DataError,
    DomainError,
    MetaError,
    SpecError,
)
from .freq import (
    FrequentistResult,
    common_effect,
    dl_tau,
    hksj_interval,
    q_profile_interval,
    q_statistic,
    random_effects_normal,
    reml_tau,
)
from .numerics import Interval
from .svgplot import plot_density_comparison

__version__ = "0.1.0"
