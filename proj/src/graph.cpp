#include "cage/graph.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cage {

AttributionGraph build_graph(const AttributionTable& table, NormalizationMode mode) {
    table.validate();

    AttributionGraph g;
    g.prompt_len = table.prompt_len;
    g.total_len = table.total_len;
    g.mode = mode;
    g.method_tag = table.method_tag;
    g.adjacency = Matrix(table.generation_len(), table.total_len);

    for (int i = 0; i < g.adjacency.rows(); ++i) {
        const int preceding = table.prompt_len + i;  // columns 0..preceding-1 are defined
        if (mode == NormalizationMode::RawPassthrough) {
            for (int j = 0; j < preceding; ++j) g.adjacency(i, j) = table.values(i, j);
            continue;
        }
        double sum = 0.0;
        for (int j = 0; j < preceding; ++j) {
            const double v = std::max(table.values(i, j), 0.0);
            g.adjacency(i, j) = v;
            sum += v;
        }
        if (mode == NormalizationMode::NonNegativeOnly) continue;
        if (sum > 0.0) {
            for (int j = 0; j < preceding; ++j) g.adjacency(i, j) /= sum;
        } else {
            // All scores clamped away: fall back to uniform over preceding units.
            const double u = 1.0 / static_cast<double>(preceding);
            for (int j = 0; j < preceding; ++j) g.adjacency(i, j) = u;
        }
    }
    return g;
}

std::vector<Edge> prune_view(const AttributionGraph& graph, double threshold) {
    if (graph.mode != NormalizationMode::RowStochastic)
        throw std::invalid_argument("prune_view: graph must be row-stochastic");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("prune_view: threshold must lie in [0, 1]");

    std::vector<Edge> edges;
    for (int i = 0; i < graph.adjacency.rows(); ++i) {
        const int target = graph.prompt_len + i;
        for (int j = 0; j < target; ++j) {
            const double w = graph.adjacency(i, j);
            if (w != 0.0 && w >= threshold) edges.push_back({j, target, w});
        }
    }
    return edges;
}

namespace {

std::string escape_label(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string export_dot(const AttributionGraph& graph, double threshold) {
    const auto edges = prune_view(graph, threshold);

    std::ostringstream os;
    os << "digraph attribution {\n";
    os << "  rankdir=LR;\n";
    for (int node = 0; node < graph.total_len; ++node) {
        const bool is_prompt = node < graph.prompt_len;
        std::string label;
        if (static_cast<int>(graph.labels.size()) == graph.total_len && !graph.labels[node].empty()) {
            label = escape_label(graph.labels[node]);
        } else {
            label = (is_prompt ? "p" + std::to_string(node + 1)
                               : "g" + std::to_string(node - graph.prompt_len + 1));
        }
        os << "  n" << (node + 1) << " [label=\"" << label << "\", shape="
           << (is_prompt ? "box" : "ellipse") << "];\n";
    }
    for (const auto& e : edges) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", e.weight);
        os << "  n" << (e.source + 1) << " -> n" << (e.target + 1) << " [label=\"" << buf << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace cage
