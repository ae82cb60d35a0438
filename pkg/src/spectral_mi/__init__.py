"""Mutual information between time series through spectral increments.

Each process is cut into windows whose DFTs act as samples of its spectral
increments. A k-nearest-neighbour (KSG) estimator measures the mutual
information between every pair of frequencies (MIF), a permutation test
keeps the significant pairs, and the coupled frequencies are combined into a
single MI estimate in nats per sample.
"""

from .aggregate import (CouplingSets, MiReport, auto_method, clustered_mi, coupled_sets,
                        coupling_components, estimate_mi, estimate_mi_linear, stack_increments)
from .errors import (ContractError, DomainError, ExcludedPairError, FormatError,
                     InsufficientDataError, ParseError, SpectralMIError, UnsupportedModelError)
from .knn_mi import KsgParams, digamma, knn_counts, ksg_mi
from .mif import (MifMatrix, PermutationResult, SignificanceMask, analyze, default_grid,
                  mif_diagonal, mif_matrix, mif_pair, permutation_test, significance_mask)
from .pipeline import EstimateResult, RunConfig, run_estimate
from .spectral import (PowerSpectrum, SpectralIncrements, integrated_spectrum,
                       power_spectrum, spectral_increments)
from .timeseries import TimeSeries, WindowPlan, load_pair_csv, plan_windows, save_pair_csv

__version__ = "0.1.0"
