from diachron.embed.sgns import (
    EmbeddingSpace,
    SgnsConfig,
    active_kernel_name,
    cosine,
    load_embeddings,
    save_embeddings,
    train_sgns,
)
from diachron.embed.vocab import (
    Vocabulary,
    build_vocab,
    noise_distribution,
)

__all__ = [
    "EmbeddingSpace",
    "SgnsConfig",
    "Vocabulary",
    "active_kernel_name",
    "build_vocab",
    "cosine",
    "load_embeddings",
    "noise_distribution",
    "save_embeddings",
    "train_sgns",
]
