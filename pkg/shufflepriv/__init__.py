__version__ = '0.1.0'

from shufflepriv._core import (ConfigurationError, CSVParseError, Dataset,
                               DimensionError, DivergenceError,
                               GaussianNoiseSpec, NumericError, Origin,
                               PrivacyError, RngStream, Sample,
                               ShufflePrivError, sample_gaussian)
from shufflepriv._tasks import (LabelEncoding, Task, TaskObjective,
                                clipped_grad, grad, loss)
from shufflepriv._prox import Penalty, Regularizer, prox_step, reg_value
from shufflepriv._shuffle import (PermutationStrategy, Strategy,
                                  permutation_for_epoch)
from shufflepriv._privacy import (MechanismProfile, PrivacyBudget,
                                  compose_epochs, epsilon_for_noise,
                                  noise_for_epsilon, rdp_epoch_loss,
                                  rdp_to_dp, validate_contraction)
from shufflepriv._schedule import (EpochPlan, PublicOrder, Schedule,
                                   ScheduleKind, accounting_profile,
                                   build_plans, private_count)
from shufflepriv._engine import (RunConfig, Trajectory, evaluate_objective,
                                 run, solve_optimum)
from shufflepriv._data import (Normalization, estimate_dissimilarity,
                               load_csv, write_csv)
from shufflepriv._sim import SyntheticKind, SyntheticSpec, generate
from shufflepriv._bench import (ExperimentConfig, GridResult, calibrate,
                                run_grid, run_single, select_winners)


__all__ = ['ConfigurationError', 'CSVParseError', 'Dataset', 'DimensionError',
           'DivergenceError', 'GaussianNoiseSpec', 'NumericError', 'Origin',
           'PrivacyError', 'RngStream', 'Sample', 'ShufflePrivError',
           'sample_gaussian', 'LabelEncoding', 'Task', 'TaskObjective',
           'clipped_grad', 'grad', 'loss', 'Penalty', 'Regularizer',
           'prox_step', 'reg_value', 'PermutationStrategy', 'Strategy',
           'permutation_for_epoch', 'MechanismProfile', 'PrivacyBudget',
           'compose_epochs', 'epsilon_for_noise', 'noise_for_epsilon',
           'rdp_epoch_loss', 'rdp_to_dp', 'validate_contraction',
           'EpochPlan', 'PublicOrder', 'Schedule', 'ScheduleKind',
           'accounting_profile', 'build_plans', 'private_count',
           'RunConfig', 'Trajectory', 'evaluate_objective', 'run',
           'solve_optimum', 'Normalization', 'estimate_dissimilarity',
           'load_csv', 'write_csv', 'SyntheticKind', 'SyntheticSpec',
           'generate', 'ExperimentConfig', 'GridResult', 'calibrate',
           'run_grid', 'run_single', 'select_winners', '__version__']
