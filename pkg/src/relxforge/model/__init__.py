"""Desk-scale transformer encoder, heads, and checkpoint format."""

from .checkpoint import (
    BadMagic,
    ChecksumFail,
    VersionMismatch,
    crc64,
    load_model,
    read_checkpoint,
    read_config,
    save_model,
    write_checkpoint,
)
from .config import ModelConfig
from .encoder import (
    EncoderModel,
    NoMaskedPositions,
    SchemaMismatch,
    SequenceTooLong,
    TokenOutOfRange,
    classification_loss,
    classifier_logits,
    classify_relation,
    matching_loss,
    matching_scores,
    mlm_loss,
)

__all__ = [
    "BadMagic",
    "ChecksumFail",
    "EncoderModel",
    "ModelConfig",
    "NoMaskedPositions",
    "SchemaMismatch",
    "SequenceTooLong",
    "TokenOutOfRange",
    "VersionMismatch",
    "classification_loss",
    "classifier_logits",
    "classify_relation",
    "crc64",
    "load_model",
    "matching_loss",
    "matching_scores",
    "mlm_loss",
    "read_checkpoint",
    "read_config",
    "save_model",
    "write_checkpoint",
]
