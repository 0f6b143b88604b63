"""Data curation and evaluation toolkit for structured-output rerankers.

The heavy lifting lives in the native ``_core`` extension; this package
re-exports its operations under one flat namespace.
"""

from ._core import (
    DEFAULT_INSTRUCTION,
    DEFAULT_SYSTEM_PROMPT,
    LENGTH_BINS,
    SCORE_BINS,
    StructuredOutput,
    ValidationError,
    Verdict,
    balance,
    bin_pair,
    checkpoint_metrics,
    cohen_kappa,
    entity_fidelity,
    format_score,
    label_match,
    loss_listwise_kl,
    loss_point,
    loss_rank_infonce,
    loss_sft,
    loss_total,
    majority_label,
    ndcg_at_k,
    normalized_entropy,
    pairwise_kappa_matrix,
    parse_output,
    regex_entities,
    relevance_score,
    render_prompt,
    select_panel,
    serialize_target,
    split_by_query,
    token_count,
)

__all__ = [
    "DEFAULT_INSTRUCTION",
    "DEFAULT_SYSTEM_PROMPT",
    "LENGTH_BINS",
    "SCORE_BINS",
    "StructuredOutput",
    "ValidationError",
    "Verdict",
    "balance",
    "bin_pair",
    "checkpoint_metrics",
    "cohen_kappa",
    "entity_fidelity",
    "format_score",
    "label_match",
    "loss_listwise_kl",
    "loss_point",
    "loss_rank_infonce",
    "loss_sft",
    "loss_total",
    "majority_label",
    "ndcg_at_k",
    "normalized_entropy",
    "pairwise_kappa_matrix",
    "parse_output",
    "regex_entities",
    "relevance_score",
    "render_prompt",
    "select_panel",
    "serialize_target",
    "split_by_query",
    "token_count",
]

__version__ = "0.1.0"
