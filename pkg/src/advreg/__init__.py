"""Nonparametric regression under adversarial input perturbations."""
from .adversarial import (LossReport, adversarial_loss, adversarial_loss_swapped, ideal_loss,
                          ideal_predictor, plug_in, standard_loss)
from .estimators import FittedPredictor, InsufficientData, predict
from .functions import Dataset, RegressionFunction, SmoothnessSpec, generate
from .grid import GridDomain, unit_lattice
from .perturbation import EmptyNeighborhood, PerturbationSample, PerturbationSet

__version__ = "0.1.0"
