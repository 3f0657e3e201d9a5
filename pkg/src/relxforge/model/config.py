"""Encoder hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass

MATCHING_HEADS = ("dot", "concat")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    layers: int = 4
    hidden: int = 128
    heads: int = 4
    ff: int = 512
    max_positions: int = 128
    dropout: float = 0.0
    ln_eps: float = 1e-12
    num_classes: int = 37
    matching_head: str = "dot"

    def __post_init__(self):
        if self.hidden % self.heads != 0:
            raise ValueError(f"hidden {self.hidden} not divisible by heads {self.heads}")
        for name in ("vocab_size", "layers", "hidden", "heads", "ff", "max_positions", "num_classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0,1), got {self.dropout}")
        if self.matching_head not in MATCHING_HEADS:
            raise ValueError(f"matching_head must be one of {MATCHING_HEADS}")

    @property
    def head_dim(self) -> int:
        return self.hidden // self.heads

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)
