"""Menzerath-Altmann and statistical-mechanical (SMMA) models of distinct-word length distributions."""

__version__ = "0.1.0"

from .corpus import (ALPHABETS, AlphabetSpec, DistributionFormatError, LengthDistribution, TokenPolicy,
                     bundled_path, distill, get_alphabet, load_distribution, save_distribution, tokenize)
from .fitting import FitConfig, FitError, FitReport, SingularSystemError, fit_ma, fit_smma, goodness
from .model import (MaParams, SmmaParams, degeneracy, log_disorder, ma_eval, ma_to_smma,
                    maximize_disorder_bruteforce, smma_eval, smma_to_ma)
from .thermo import ThermoReport, compare, thermo_report

__all__ = [
    "ALPHABETS", "AlphabetSpec", "DistributionFormatError", "LengthDistribution", "TokenPolicy",
    "bundled_path", "distill", "get_alphabet", "load_distribution", "save_distribution", "tokenize",
    "FitConfig", "FitError", "FitReport", "SingularSystemError", "fit_ma", "fit_smma", "goodness",
    "MaParams", "SmmaParams", "degeneracy", "log_disorder", "ma_eval", "ma_to_smma",
    "maximize_disorder_bruteforce", "smma_eval", "smma_to_ma",
    "ThermoReport", "compare", "thermo_report",
]
