#pragma once

// Attribution graph construction: converts a raw attribution table into the
// adjacency matrix of a causal influence DAG, plus display-oriented pruning
// and DOT export.

#include "cage/core.hpp"

namespace cage {

/// Adjacency of the influence DAG. Row i holds the incoming edge weights of
/// generated node prompt_len + i; prompt nodes have no incoming edges and no
/// stored rows. In RowStochastic mode every row is nonnegative and sums to 1.
struct AttributionGraph {
    int prompt_len = 0;
    int total_len = 0;
    Matrix adjacency;  // generation_len x total_len
    NormalizationMode mode = NormalizationMode::RowStochastic;
    std::string method_tag;
    std::vector<std::string> labels;  // unit texts for rendering; size total_len or empty

    int generation_len() const { return total_len - prompt_len; }
};

/// Directed edge between global node indices (0-based), source < target.
struct Edge {
    int source = 0;
    int target = 0;
    double weight = 0.0;

    bool operator==(const Edge&) const = default;
};

/// Builds the graph from a table. RowStochastic clamps negatives to zero and
/// normalizes each row to sum 1; rows whose clamped sum is zero fall back to
/// the uniform distribution over all preceding units, so the row-sum
/// invariant holds unconditionally. NonNegativeOnly clamps without
/// normalizing; RawPassthrough copies the table unchanged.
AttributionGraph build_graph(const AttributionTable& table, NormalizationMode mode);

/// Returns the edges with weight >= threshold, ordered by (target, source).
/// Display-only: the graph is never modified and surviving edges are never
/// renormalized. Requires RowStochastic mode (thresholds are only comparable
/// on normalized weights) and threshold in [0, 1].
std::vector<Edge> prune_view(const AttributionGraph& graph, double threshold);

/// Renders the pruned view as a DOT digraph: node ids n1..nT in global index
/// order, prompt nodes boxed, edge labels rounded to 3 decimals.
std::string export_dot(const AttributionGraph& graph, double threshold);

}  // namespace cage
