"""Forward-backward feature selection with early dropping."""

from .criteria import AIC, BIC, EBIC, LRTest, chi2_sf, default_gamma, implied_alpha, lr_test
from .dataset import Dataset, DatasetError, generate_null_dataset, load_csv, save_csv
from .graphs import Dag, brute_force_mb, d_separated, markov_blanket, oracle_criterion, random_dag
from .regression import FitResult, SingularDesignError, fit_gaussian, fit_logistic
from .selection import SelectionResult, backward_phase, fbed, fbs, one_run

__all__ = [
    "AIC", "BIC", "EBIC", "LRTest", "chi2_sf", "default_gamma", "implied_alpha", "lr_test",
    "Dataset", "DatasetError", "generate_null_dataset", "load_csv", "save_csv",
    "Dag", "brute_force_mb", "d_separated", "markov_blanket", "oracle_criterion", "random_dag",
    "FitResult", "SingularDesignError", "fit_gaussian", "fit_logistic",
    "SelectionResult", "backward_phase", "fbed", "fbs", "one_run",
]
