from gmtpool.tasks.classify import (  # noqa: F401
    FoldResult,
    TrainState,
    evaluate_accuracy,
    run_fold,
    summarise,
    train_classifier,
)
from gmtpool.tasks.models import ClassifierModel, ReconModel  # noqa: F401
from gmtpool.tasks.reconstruct import (  # noqa: F401
    ReconErrors,
    cross_objective,
    reconstruct_adjacency_error,
    reconstruction_errors,
    run_reconstruction,
    train_reconstruction,
)
