#pragma once

// Serialization for every on-disk artifact and the scoring wire protocol.
// All formats are JSON (JSON Lines for corpora); doubles survive a
// save/load round trip bitwise. Indices are 1-based on disk and 0-based in
// memory.

#include "cage/core.hpp"
#include "cage/graph.hpp"
#include "cage/metrics.hpp"
#include "cage/modelclient.hpp"

#include <nlohmann/json_fwd.hpp>

namespace cage::io {

struct ParseError : std::runtime_error {
    ParseError(const std::string& source, int line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          source(source),
          line(line) {}
    std::string source;
    int line;  ///< 1-based line number, 0 when not line-oriented
};

// Wire protocol bodies.
nlohmann::json to_json(const ScoreRequest& request);
ScoreRequest score_request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScoreResponse& response);
ScoreResponse score_response_from_json(const nlohmann::json& j);

// Record converters.
nlohmann::json to_json(const AttributionTable& table);
AttributionTable table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttributionGraph& graph);
AttributionGraph graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ContextAttribution& attribution);
ContextAttribution attribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Example& example);
Example example_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MockModelSpec& spec);
MockModelSpec mock_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DeletionCurve& curve);
DeletionCurve curve_from_json(const nlohmann::json& j);

// Single-record files. Loaders validate invariants; in particular
// load_table rejects causality violations with the offending position.
void save_table(const std::string& path, const AttributionTable& table);
AttributionTable load_table(const std::string& path);
void save_graph(const std::string& path, const AttributionGraph& graph);
AttributionGraph load_graph(const std::string& path);
void save_attribution(const std::string& path, const ContextAttribution& attribution);
ContextAttribution load_attribution(const std::string& path);
void save_curve(const std::string& path, const DeletionCurve& curve);
void save_mock_spec(const std::string& path, const MockModelSpec& spec);
MockModelSpec load_mock_spec(const std::string& path);

// Line-oriented corpora; parse failures report the line number.
void save_examples_jsonl(const std::string& path, const std::vector<Example>& examples);
std::vector<Example> load_examples_jsonl(const std::string& path);
void save_mock_specs_jsonl(const std::string& path, const std::vector<MockModelSpec>& specs);
std::vector<MockModelSpec> load_mock_specs_jsonl(const std::string& path);

/// Tab-separated summary with a header row: method, mode, metric, mean,
/// stdev, n.
void save_summary_tsv(const std::string& path, const std::vector<SummaryRow>& rows);
std::string summary_to_tsv(const std::vector<SummaryRow>& rows);

/// Writes text to path, throwing on any filesystem error.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace cage::io
