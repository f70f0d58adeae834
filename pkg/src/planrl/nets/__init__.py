"""Feed-forward nets, optimizer, input normalizer, checkpointing."""

from .checkpoint import load_checkpoint, save_checkpoint
from .mlp import (Mlp, backward, clone_mlp, forward, forward_cache, init_mlp,
                  polyak_blend)
from .normalizer import Normalizer, normalize, normalizer_update
from .optim import AdamState, adam_init, adam_step

__all__ = [
    "AdamState", "Mlp", "Normalizer", "adam_init", "adam_step", "backward",
    "clone_mlp", "forward", "forward_cache", "init_mlp", "load_checkpoint",
    "normalize", "normalizer_update", "polyak_blend", "save_checkpoint",
]
