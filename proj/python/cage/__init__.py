"""Causal attribution graphs over autoregressive generations.

Thin re-export of the compiled extension; see the project README for the
matching CLI and file formats.
"""

from ._cage import (  # noqa: F401
    AttributionGraph,
    AttributionTable,
    ContextAttribution,
    DeletionCurve,
    Edge,
    Example,
    FactsExample,
    FactsParams,
    HttpBackend,
    MockBackend,
    MockModelSpec,
    NormalizationMode,
    ScoreBackend,
    SummaryRow,
    TotalInfluenceMatrix,
    TruncatedDistribution,
    UnitLevel,
    UnitSpan,
    __version__,
    aggregate_to_sentences,
    attribute_output,
    attribute_token,
    attribution_coverage,
    build_graph,
    clp_table,
    deletion_curve,
    export_dot,
    faithfulness_suite,
    generate_facts_example,
    import_table,
    kl_truncated,
    load_attribution,
    load_claim_pool,
    load_examples,
    load_graph,
    load_table,
    mock_generate,
    perturbation_table,
    propagate_step,
    prune_view,
    row_attribution,
    save_attribution,
    save_examples,
    save_graph,
    save_table,
    segment_text,
    total_influence,
)

__all__ = [name for name in dir() if not name.startswith("_")]
