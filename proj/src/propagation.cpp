#include "cage/propagation.hpp"

namespace cage {

namespace {

void check_generated_node(const AttributionGraph& graph, int node, const char* where) {
    if (node < graph.prompt_len)
        throw std::invalid_argument(std::string(where) + ": prompt nodes have no incoming edges");
    if (node >= graph.total_len)
        throw std::invalid_argument(std::string(where) + ": node index out of range");
}

}  // namespace

std::vector<double> propagate_step(std::vector<double> acc,
                                   const AttributionGraph& graph,
                                   int node) {
    check_generated_node(graph, node, "propagate_step");
    if (acc.size() != static_cast<size_t>(graph.total_len))
        throw std::invalid_argument("propagate_step: accumulator length mismatch");

    const double coeff = acc[node];
    if (coeff == 0.0) return acc;
    const int row = node - graph.prompt_len;
    for (int j = 0; j < node; ++j) acc[j] += coeff * graph.adjacency(row, j);
    return acc;
}

namespace {

// Shared elimination kernel: descending sweep that folds every intermediate
// generation's coefficient into its incoming edges, then zeroes it.
std::vector<double> propagated_row(const AttributionGraph& graph, int node) {
    std::vector<double> acc(graph.total_len, 0.0);
    const int row = node - graph.prompt_len;
    for (int j = 0; j < node; ++j) acc[j] = graph.adjacency(row, j);
    for (int i = node - 1; i >= graph.prompt_len; --i) {
        const double coeff = acc[i];
        if (coeff != 0.0) {
            const int r = i - graph.prompt_len;
            for (int j = 0; j < i; ++j) acc[j] += coeff * graph.adjacency(r, j);
        }
        acc[i] = 0.0;
    }
    return acc;
}

}  // namespace

ContextAttribution attribute_token(const AttributionGraph& graph, int node) {
    check_generated_node(graph, node, "attribute_token");

    const auto acc = propagated_row(graph, node);
    ContextAttribution result;
    result.scores.assign(acc.begin(), acc.begin() + graph.prompt_len);
    result.output_indices = {node - graph.prompt_len};
    result.method_tag = graph.method_tag.empty() ? "cage" : graph.method_tag + "+cage";
    result.mode = graph.mode;
    return result;
}

TotalInfluenceMatrix total_influence(const AttributionGraph& graph) {
    TotalInfluenceMatrix out;
    out.prompt_len = graph.prompt_len;
    out.total_len = graph.total_len;
    out.values = Matrix(graph.generation_len(), graph.total_len);

    // Row i depends only on completed rows j < i; the reuse sum runs in
    // ascending j so results do not depend on scheduling.
    for (int i = 0; i < out.values.rows(); ++i) {
        const int node = graph.prompt_len + i;
        for (int j = 0; j < node; ++j) out.values(i, j) = graph.adjacency(i, j);
        for (int j = 0; j < i; ++j) {
            const double coeff = graph.adjacency(i, graph.prompt_len + j);
            if (coeff == 0.0) continue;
            for (int c = 0; c < graph.prompt_len + j; ++c)
                out.values(i, c) += coeff * out.values(j, c);
        }
    }
    return out;
}

ContextAttribution attribute_output(const AttributionGraph& graph,
                                    const std::set<int>& output_indices,
                                    bool normalize_by_output) {
    if (output_indices.empty()) throw std::invalid_argument("attribute_output: empty output set");
    for (int idx : output_indices) {
        if (idx < 0 || idx >= graph.generation_len())
            throw std::invalid_argument("attribute_output: output index out of range");
    }

    std::vector<double> scores(graph.prompt_len, 0.0);
    for (int idx : output_indices) {
        const auto row = propagated_row(graph, graph.prompt_len + idx);
        for (int j = 0; j < graph.prompt_len; ++j) scores[j] += row[j];
    }
    if (normalize_by_output) {
        const double k = static_cast<double>(output_indices.size());
        for (double& s : scores) s /= k;
    }

    ContextAttribution result;
    result.scores = std::move(scores);
    result.output_indices = output_indices;
    result.method_tag = graph.method_tag.empty() ? "cage" : graph.method_tag + "+cage";
    result.mode = graph.mode;
    return result;
}

ContextAttribution row_attribution(const AttributionTable& table,
                                   const std::set<int>& output_indices) {
    if (output_indices.empty()) throw std::invalid_argument("row_attribution: empty output set");
    for (int idx : output_indices) {
        if (idx < 0 || idx >= table.generation_len())
            throw std::invalid_argument("row_attribution: output index out of range");
    }

    ContextAttribution result;
    result.scores.assign(table.prompt_len, 0.0);
    for (int idx : output_indices) {
        for (int j = 0; j < table.prompt_len; ++j) result.scores[j] += table.values(idx, j);
    }
    result.output_indices = output_indices;
    result.method_tag = table.method_tag.empty() ? "row" : table.method_tag + "+row";
    result.mode = NormalizationMode::RawPassthrough;
    return result;
}

}  // namespace cage
