"""BMI estimation from face embeddings.

Everything downstream of the embedding network: an epsilon-SVR trained by
sequential minimal optimization, person-aware train/test split protocols,
a stratified pairwise comparison task with questionnaire export, and a
matched-pair demographic bias audit. Embeddings enter through the F2BE
binary file format.
"""

from .bias import (
    AuditPair,
    AuditReport,
    GroupAttr,
    binomial_test,
    build_audit_pairs,
    run_audit,
)
from .dataset import (
    BuildReport,
    Dataset,
    build_dataset,
    load_metadata,
    read_embeddings,
    write_embeddings,
)
from .domain import (
    BmiCategory,
    FaceRecord,
    Gender,
    Role,
    categorize,
    compute_bmi,
)
from .evaluation import (
    ComparisonPair,
    EvalReport,
    GenderCategory,
    answer_pairs,
    evaluate_regression,
    export_questionnaire,
    generate_pairs,
    pearson,
    score_human_answers,
)
from .kernels import KernelKind, KernelSpec, kernel_eval
from .solver import compiled_available, default_backend
from .splits import (
    Protocol,
    SplitPlan,
    load_split,
    save_split,
    split_across_people,
    split_within_person,
)
from .svr import SvrHyperParams, SvrModel, load_model, predict, save_model, train

__version__ = "0.1.0"

__all__ = [
    "AuditPair",
    "AuditReport",
    "BmiCategory",
    "BuildReport",
    "ComparisonPair",
    "Dataset",
    "EvalReport",
    "FaceRecord",
    "Gender",
    "GenderCategory",
    "GroupAttr",
    "KernelKind",
    "KernelSpec",
    "Protocol",
    "Role",
    "SplitPlan",
    "SvrHyperParams",
    "SvrModel",
    "answer_pairs",
    "binomial_test",
    "build_audit_pairs",
    "build_dataset",
    "categorize",
    "compiled_available",
    "compute_bmi",
    "default_backend",
    "evaluate_regression",
    "export_questionnaire",
    "generate_pairs",
    "kernel_eval",
    "load_metadata",
    "load_model",
    "load_split",
    "pearson",
    "predict",
    "read_embeddings",
    "run_audit",
    "save_model",
    "save_split",
    "score_human_answers",
    "split_across_people",
    "split_within_person",
    "train",
    "write_embeddings",
]
