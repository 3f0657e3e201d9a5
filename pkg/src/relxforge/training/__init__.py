"""Training loops, directional F1 evaluation, and experiment utilities."""

from .curve import curve_to_tsv, learning_curve, stratified_fraction
from .dataset import (
    LabeledDataset,
    MalformedRecord,
    RelationExample,
    load_kbp37,
    parse_marked_text,
    save_kbp37,
)
from .finetune import (
    FinetuneResult,
    encode_dataset,
    encode_example,
    evaluate_model,
    finetune,
    predict,
)
from .metrics import EvalReport, LengthMismatch, evaluate_f1, f1_from_counts
from .pretrain import (
    EncodedPair,
    PretrainResult,
    encode_pair,
    encode_pairs,
    load_training_state,
    matching_accuracy,
    pretrain,
    resume_pretrain,
    save_training_state,
)
from .schema import KBP37_RELATIONS, NO_RELATION, RelationSchema, kbp37_schema
from .significance import randomization_test
from .subset import SizeTooLarge, length_score, select_subset, stratified_sample, stratified_targets

__all__ = [
    "EncodedPair",
    "EvalReport",
    "FinetuneResult",
    "KBP37_RELATIONS",
    "LabeledDataset",
    "LengthMismatch",
    "MalformedRecord",
    "NO_RELATION",
    "PretrainResult",
    "RelationExample",
    "RelationSchema",
    "SizeTooLarge",
    "curve_to_tsv",
    "encode_dataset",
    "encode_example",
    "encode_pair",
    "encode_pairs",
    "evaluate_f1",
    "evaluate_model",
    "f1_from_counts",
    "finetune",
    "kbp37_schema",
    "learning_curve",
    "length_score",
    "load_kbp37",
    "save_kbp37",
    "load_training_state",
    "matching_accuracy",
    "parse_marked_text",
    "predict",
    "pretrain",
    "randomization_test",
    "resume_pretrain",
    "save_training_state",
    "select_subset",
    "stratified_fraction",
    "stratified_sample",
    "stratified_targets",
]
