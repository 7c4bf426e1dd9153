#pragma once

// Influence propagation over the attribution graph. Because the embedded
// T x T adjacency is strictly lower triangular, all-path marginalization is
// a finite sum and reduces to triangular substitution; no matrix inverse is
// ever formed.

#include "cage/core.hpp"
#include "cage/graph.hpp"

namespace cage {

/// Fully propagated influence, one row per generated unit. In RowStochastic
/// mode each row's prompt slice sums to 1.
struct TotalInfluenceMatrix {
    int prompt_len = 0;
    int total_len = 0;
    Matrix values;  // generation_len x total_len

    int generation_len() const { return total_len - prompt_len; }
};

/// One propagation step: distributes the accumulated coefficient at node
/// `node` backward along that node's incoming edges. Returns
/// acc + acc[node] * row(node); the coefficient at `node` itself is retained
/// (callers zero it when reporting prompt slices). `node` is a global index
/// of a generated unit.
std::vector<double> propagate_step(std::vector<double> acc,
                                   const AttributionGraph& graph,
                                   int node);

/// Context attribution of a single generated node (global index in
/// [prompt_len, total_len)): eliminates intermediate generations in
/// descending index order, accumulating their coefficients, then reports the
/// prompt slice. Equals the all-paths sum of edge-weight products from each
/// prompt node to `node`.
ContextAttribution attribute_token(const AttributionGraph& graph, int node);

/// All rows at once by forward substitution: row i is the graph row plus the
/// coefficient-weighted, already-completed rows of earlier generations.
/// Summation order within each row is fixed, so results are
/// scheduling-independent.
TotalInfluenceMatrix total_influence(const AttributionGraph& graph);

/// Context attribution of an output set (0-based generation-unit indices):
/// the sum of the per-unit propagated rows. With normalize_by_output the sum
/// is divided by |output| so RowStochastic scores sum to 1 instead of
/// |output|.
ContextAttribution attribute_output(const AttributionGraph& graph,
                                    const std::set<int>& output_indices,
                                    bool normalize_by_output = false);

/// Baseline that ignores inter-generational influence: sums the selected raw
/// table rows, drops generated-unit columns and reports the prompt slice
/// unnormalized.
ContextAttribution row_attribution(const AttributionTable& table,
                                   const std::set<int>& output_indices);

}  // namespace cage
