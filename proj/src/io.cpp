#include "cage/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cage::io {

using nlohmann::json;

namespace {

void require_fields(const json& j, std::initializer_list<const char*> fields,
                    const std::string& what) {
    if (!j.is_object()) throw std::runtime_error(what + ": expected a JSON object");
    for (const char* f : fields) {
        if (!j.contains(f)) throw std::runtime_error(what + ": missing field '" + f + "'");
    }
}

json matrix_to_flat(const Matrix& m) { return json(m.data()); }

Matrix matrix_from_flat(const json& flat, int rows, int cols, const std::string& what) {
    if (rows < 0 || cols < 0 || !flat.is_array() ||
        flat.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
        throw std::runtime_error(what + ": value count does not match declared shape");
    Matrix m(rows, cols);
    m.data() = flat.get<std::vector<double>>();
    return m;
}

std::set<int> indices_from_disk(const json& arr, const std::string& what) {
    std::set<int> out;
    for (const auto& v : arr) {
        const int idx = v.get<int>();
        if (idx < 1) throw std::runtime_error(what + ": indices on disk are 1-based");
        out.insert(idx - 1);
    }
    return out;
}

json indices_to_disk(const std::set<int>& indices) {
    json arr = json::array();
    for (int idx : indices) arr.push_back(idx + 1);
    return arr;
}

}  // namespace

json to_json(const ScoreRequest& request) {
    return json{{"units", request.units},
                {"want_distributions", request.want_distributions},
                {"top_k", request.top_k}};
}

ScoreRequest score_request_from_json(const json& j) {
    require_fields(j, {"units"}, "score request");
    ScoreRequest request;
    request.units = j.at("units").get<std::vector<std::string>>();
    request.want_distributions = j.value("want_distributions", false);
    request.top_k = j.value("top_k", 0);
    return request;
}

json to_json(const ScoreResponse& response) {
    json j{{"unit_logprobs", response.unit_logprobs}};
    if (!response.distributions.empty()) {
        json dists = json::array();
        for (const auto& unit_dists : response.distributions) {
            json per_unit = json::array();
            for (const auto& d : unit_dists) {
                json entries = json::array();
                for (const auto& [id, p] : d.entries) entries.push_back(json::array({id, p}));
                per_unit.push_back(json{{"entries", entries}, {"tail_mass", d.tail_mass}});
            }
            dists.push_back(per_unit);
        }
        j["distributions"] = dists;
    }
    return j;
}

ScoreResponse score_response_from_json(const json& j) {
    require_fields(j, {"unit_logprobs"}, "score response");
    ScoreResponse response;
    response.unit_logprobs = j.at("unit_logprobs").get<std::vector<double>>();
    if (j.contains("distributions")) {
        for (const auto& per_unit : j.at("distributions")) {
            std::vector<TruncatedDistribution> unit_dists;
            for (const auto& dj : per_unit) {
                TruncatedDistribution d;
                for (const auto& e : dj.at("entries"))
                    d.entries.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
                d.tail_mass = dj.value("tail_mass", 0.0);
                unit_dists.push_back(std::move(d));
            }
            response.distributions.push_back(std::move(unit_dists));
        }
    }
    return response;
}

json to_json(const AttributionTable& table) {
    return json{{"prompt_len", table.prompt_len},
                {"total_len", table.total_len},
                {"unit_level", to_string(table.unit_level)},
                {"method_tag", table.method_tag},
                {"values", matrix_to_flat(table.values)}};
}

AttributionTable table_from_json(const json& j) {
    require_fields(j, {"prompt_len", "total_len", "values"}, "table");
    AttributionTable table;
    table.prompt_len = j.at("prompt_len").get<int>();
    table.total_len = j.at("total_len").get<int>();
    table.unit_level = unit_level_from_string(j.value("unit_level", "sentence"));
    table.method_tag = j.value("method_tag", "");
    table.values = matrix_from_flat(j.at("values"), table.total_len - table.prompt_len,
                                    table.total_len, "table");
    table.validate();
    return table;
}

json to_json(const AttributionGraph& graph) {
    return json{{"prompt_len", graph.prompt_len},
                {"total_len", graph.total_len},
                {"mode", to_string(graph.mode)},
                {"method_tag", graph.method_tag},
                {"adjacency", matrix_to_flat(graph.adjacency)},
                {"labels", graph.labels}};
}

AttributionGraph graph_from_json(const json& j) {
    require_fields(j, {"prompt_len", "total_len", "mode", "adjacency"}, "graph");
    AttributionGraph graph;
    graph.prompt_len = j.at("prompt_len").get<int>();
    graph.total_len = j.at("total_len").get<int>();
    if (graph.prompt_len < 1 || graph.total_len <= graph.prompt_len)
        throw std::runtime_error("graph: invalid prompt_len/total_len");
    graph.mode = normalization_mode_from_string(j.at("mode").get<std::string>());
    graph.method_tag = j.value("method_tag", "");
    graph.adjacency = matrix_from_flat(j.at("adjacency"), graph.total_len - graph.prompt_len,
                                       graph.total_len, "graph");
    if (j.contains("labels")) {
        graph.labels = j.at("labels").get<std::vector<std::string>>();
        if (!graph.labels.empty() && static_cast<int>(graph.labels.size()) != graph.total_len)
            throw std::runtime_error("graph: label count does not match total_len");
    }
    for (int i = 0; i < graph.adjacency.rows(); ++i) {
        for (int c = graph.prompt_len + i; c < graph.total_len; ++c) {
            if (graph.adjacency(i, c) != 0.0) throw CausalityError(i, c, graph.adjacency(i, c));
        }
    }
    return graph;
}

json to_json(const ContextAttribution& attribution) {
    return json{{"scores", attribution.scores},
                {"output_indices", indices_to_disk(attribution.output_indices)},
                {"method_tag", attribution.method_tag},
                {"mode", to_string(attribution.mode)}};
}

ContextAttribution attribution_from_json(const json& j) {
    require_fields(j, {"scores", "output_indices"}, "attribution");
    ContextAttribution attribution;
    attribution.scores = j.at("scores").get<std::vector<double>>();
    attribution.output_indices = indices_from_disk(j.at("output_indices"), "attribution");
    attribution.method_tag = j.value("method_tag", "");
    attribution.mode = normalization_mode_from_string(j.value("mode", "sum1"));
    return attribution;
}

json to_json(const Example& example) {
    std::vector<std::string> prompt, generated;
    for (const auto& u : example.prompt_units) prompt.push_back(u.text);
    for (const auto& u : example.generated_units) generated.push_back(u.text);
    json j{{"prompt_units", prompt},
           {"generated_units", generated},
           {"output_indices", indices_to_disk(example.output_indices)},
           {"unit_level", to_string(example.unit_level)}};
    if (example.gt_indices) j["gt_indices"] = indices_to_disk(*example.gt_indices);
    return j;
}

Example example_from_json(const json& j) {
    require_fields(j, {"prompt_units", "generated_units", "output_indices"}, "example");
    std::optional<std::set<int>> gt;
    if (j.contains("gt_indices")) gt = indices_from_disk(j.at("gt_indices"), "example");
    return make_example(j.at("prompt_units").get<std::vector<std::string>>(),
                        j.at("generated_units").get<std::vector<std::string>>(),
                        indices_from_disk(j.at("output_indices"), "example"), std::move(gt),
                        unit_level_from_string(j.value("unit_level", "sentence")));
}

json to_json(const MockModelSpec& spec) {
    return json{{"generation_len", spec.generation_len()},
                {"total_len", spec.total_len()},
                {"dependency", matrix_to_flat(spec.dependency)},
                {"base_logprob", spec.base_logprob},
                {"templates", spec.templates}};
}

MockModelSpec mock_spec_from_json(const json& j) {
    require_fields(j, {"generation_len", "total_len", "dependency", "base_logprob"}, "mock spec");
    MockModelSpec spec;
    const int rows = j.at("generation_len").get<int>();
    const int cols = j.at("total_len").get<int>();
    spec.dependency = matrix_from_flat(j.at("dependency"), rows, cols, "mock spec");
    spec.base_logprob = j.at("base_logprob").get<std::vector<double>>();
    if (j.contains("templates")) spec.templates = j.at("templates").get<std::vector<std::string>>();
    spec.validate();
    return spec;
}

json to_json(const DeletionCurve& curve) {
    json order = json::array();
    for (int idx : curve.ablation_order) order.push_back(idx + 1);
    return json{{"fractions", curve.fractions},
                {"probabilities", curve.probabilities},
                {"raw_probabilities", curve.raw_probabilities},
                {"ablation_order", order},
                {"auc", curve.auc},
                {"method_tag", curve.method_tag},
                {"mode", to_string(curve.mode)}};
}

DeletionCurve curve_from_json(const json& j) {
    require_fields(j, {"fractions", "probabilities", "auc"}, "curve");
    DeletionCurve curve;
    curve.fractions = j.at("fractions").get<std::vector<double>>();
    curve.probabilities = j.at("probabilities").get<std::vector<double>>();
    if (j.contains("raw_probabilities"))
        curve.raw_probabilities = j.at("raw_probabilities").get<std::vector<double>>();
    if (j.contains("ablation_order")) {
        for (const auto& v : j.at("ablation_order")) curve.ablation_order.push_back(v.get<int>() - 1);
    }
    curve.auc = j.at("auc").get<double>();
    curve.method_tag = j.value("method_tag", "");
    curve.mode = normalization_mode_from_string(j.value("mode", "sum1"));
    return curve;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

json parse_file(const std::string& path, const char* what) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path, 0, std::string(what) + ": " + e.what());
    }
}

template <typename T>
std::vector<T> load_jsonl(const std::string& path, T (*from_json)(const json&)) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<T> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    return out;
}

template <typename T>
void save_jsonl(const std::string& path, const std::vector<T>& records) {
    std::ostringstream ss;
    for (const auto& r : records) ss << to_json(r).dump() << "\n";
    write_text_file(path, ss.str());
}

}  // namespace

void save_table(const std::string& path, const AttributionTable& table) {
    table.validate();
    write_text_file(path, to_json(table).dump(2) + "\n");
}

AttributionTable load_table(const std::string& path) {
    return table_from_json(parse_file(path, "table"));
}

void save_graph(const std::string& path, const AttributionGraph& graph) {
    write_text_file(path, to_json(graph).dump(2) + "\n");
}

AttributionGraph load_graph(const std::string& path) {
    return graph_from_json(parse_file(path, "graph"));
}

void save_attribution(const std::string& path, const ContextAttribution& attribution) {
    write_text_file(path, to_json(attribution).dump(2) + "\n");
}

ContextAttribution load_attribution(const std::string& path) {
    return attribution_from_json(parse_file(path, "attribution"));
}

void save_curve(const std::string& path, const DeletionCurve& curve) {
    write_text_file(path, to_json(curve).dump(2) + "\n");
}

void save_mock_spec(const std::string& path, const MockModelSpec& spec) {
    write_text_file(path, to_json(spec).dump(2) + "\n");
}

MockModelSpec load_mock_spec(const std::string& path) {
    return mock_spec_from_json(parse_file(path, "mock spec"));
}

void save_examples_jsonl(const std::string& path, const std::vector<Example>& examples) {
    save_jsonl(path, examples);
}

std::vector<Example> load_examples_jsonl(const std::string& path) {
    return load_jsonl<Example>(path, &example_from_json);
}

void save_mock_specs_jsonl(const std::string& path, const std::vector<MockModelSpec>& specs) {
    save_jsonl(path, specs);
}

std::vector<MockModelSpec> load_mock_specs_jsonl(const std::string& path) {
    return load_jsonl<MockModelSpec>(path, &mock_spec_from_json);
}

std::string summary_to_tsv(const std::vector<SummaryRow>& rows) {
    std::ostringstream ss;
    ss << "method\tmode\tmetric\tmean\tstdev\tn\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", r.mean, r.stdev);
        ss << r.method << "\t" << r.mode << "\t" << r.metric << "\t" << buf << "\t" << r.n << "\n";
    }
    return ss.str();
}

void save_summary_tsv(const std::string& path, const std::vector<SummaryRow>& rows) {
    write_text_file(path, summary_to_tsv(rows));
}

}  // namespace cage::io
