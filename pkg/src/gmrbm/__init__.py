"""Gaussian-visible RBMs with q-state categorical (Potts) hidden slots.

Library surface: parameter containers and closed-form conditionals
(``model``), brute-force exact oracles for tiny models (``exact``), Gibbs
and Langevin transition kernels (``sampler``), contrastive-divergence
training (``trainer``), model-sizing protocols (``matching``), the
hetero-associative recall benchmark (``assoc``), and text file formats
(``data_io``).  The ``gmrbm`` console script exposes train / sample /
recall / sweep / match / inspect.
"""

from .assoc import (
    PairDataset,
    RecallResult,
    SweepCell,
    build_pair_dataset,
    evaluate_recall,
    recall_accuracy_batch,
    recall_one,
    run_hidden_sweep,
    run_q_sweep,
    synth_pairs,
    train_recall_model,
)
from .data_io import (
    GmmSpec,
    VectorFile,
    load_checkpoint,
    read_vectors,
    sample_gmm,
    save_checkpoint,
    write_vectors,
)
from .errors import CapacityError, ConfigError, DataFormatError, NumericalAbort
from .exact import (
    ExactSummary,
    enumerate_codes,
    exact_gradient,
    exact_log_likelihood,
    exact_posterior,
    exact_slot_marginals,
    exact_summary,
)
from .matching import (
    MatchReport,
    budget_hidden_units,
    capacity_matched_mprime,
    capacity_matched_report,
    gb_param_count,
    gm_param_count,
    parameter_matched_report,
)
from .model import (
    GbParams,
    ModelParams,
    conditional_mean,
    energy,
    gb_energy,
    gb_hidden_probabilities,
    gb_visible_conditional,
    hidden_posterior,
    offset_constant,
    reduce_q2,
    visible_conditional,
)
from .rng import substream
from .sampler import (
    ChainState,
    SamplerConfig,
    clamped_completion,
    gibbs_sweep,
    langevin_visible_step,
    noise_gibbs_samples,
    sample_hidden,
    sample_visible,
)
from .trainer import (
    AdamState,
    ChainPool,
    EarlyStopRule,
    GradientRecord,
    TrainConfig,
    adam_step,
    cd_update,
    fit,
    init_params,
    negative_statistics,
    positive_statistics,
    reconstruction_error,
)

__version__ = "0.1.0"
