"""Visual-prior prompt personalization: python surface over the C++ core."""

from ._core import (
    Persona,
    VpttError,
    allocate_quotas,
    attention_weights,
    blind_shuffle,
    cohens_d,
    combination_count,
    compose_prompt,
    effective_posts,
    face_seed,
    kendalls_w,
    normalize_likert,
    novelty,
    personalize,
    retrieval_entropy,
    scaffold_persona,
    score_prompt,
    seed_index,
    select_posts,
    spearman_rho,
)

__all__ = [
    "Persona",
    "VpttError",
    "allocate_quotas",
    "attention_weights",
    "blind_shuffle",
    "cohens_d",
    "combination_count",
    "compose_prompt",
    "effective_posts",
    "face_seed",
    "kendalls_w",
    "normalize_likert",
    "novelty",
    "personalize",
    "retrieval_entropy",
    "scaffold_persona",
    "score_prompt",
    "seed_index",
    "select_posts",
    "spearman_rho",
]

__version__ = "0.1.0"
