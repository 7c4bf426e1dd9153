// Python bindings for the main operations: segmentation, graph
// construction, propagation, base methods over the mock backend, metrics
// and the synthetic data generator.

#include "cage/baseattr.hpp"
#include "cage/core.hpp"
#include "cage/datagen.hpp"
#include "cage/graph.hpp"
#include "cage/io.hpp"
#include "cage/metrics.hpp"
#include "cage/modelclient.hpp"
#include "cage/propagation.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cage;

namespace {

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        rows[i].resize(m.cols());
        for (int j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("matrix rows must be nonempty");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::invalid_argument("matrix rows must have equal length");
        for (size_t j = 0; j < rows[i].size(); ++j) m(int(i), int(j)) = rows[i][j];
    }
    return m;
}

AttributionTable make_table(int prompt_len, const std::vector<std::vector<double>>& values,
                            const std::string& method_tag, UnitLevel level) {
    AttributionTable t;
    t.values = matrix_from_rows(values);
    t.prompt_len = prompt_len;
    t.total_len = t.values.cols();
    t.method_tag = method_tag;
    t.unit_level = level;
    t.validate();
    return t;
}

MockModelSpec make_mock_spec(const std::vector<std::vector<double>>& dependency,
                             const std::vector<double>& base_logprob,
                             const std::vector<std::string>& templates) {
    MockModelSpec spec;
    spec.dependency = matrix_from_rows(dependency);
    spec.base_logprob = base_logprob;
    spec.templates = templates;
    spec.validate();
    return spec;
}

}  // namespace

PYBIND11_MODULE(_cage, m) {
    m.doc() = "Causal attribution graphs over autoregressive generations";

    py::enum_<UnitLevel>(m, "UnitLevel")
        .value("TOKEN", UnitLevel::Token)
        .value("SENTENCE", UnitLevel::Sentence);

    py::enum_<NormalizationMode>(m, "NormalizationMode")
        .value("ROW_STOCHASTIC", NormalizationMode::RowStochastic)
        .value("NON_NEGATIVE_ONLY", NormalizationMode::NonNegativeOnly)
        .value("RAW_PASSTHROUGH", NormalizationMode::RawPassthrough);

    py::class_<UnitSpan>(m, "UnitSpan")
        .def(py::init<int, int, std::string>(), py::arg("start"), py::arg("end"), py::arg("text"))
        .def_readonly("start", &UnitSpan::start)
        .def_readonly("end", &UnitSpan::end)
        .def_readonly("text", &UnitSpan::text)
        .def("__repr__", [](const UnitSpan& s) {
            return "UnitSpan(" + std::to_string(s.start) + ", " + std::to_string(s.end) + ", '" +
                   s.text + "')";
        });

    py::class_<Example>(m, "Example")
        .def(py::init([](std::vector<std::string> prompt_units,
                         std::vector<std::string> generated_units, std::set<int> output_indices,
                         std::optional<std::set<int>> gt_indices, UnitLevel unit_level) {
                 return make_example(std::move(prompt_units), std::move(generated_units),
                                     std::move(output_indices), std::move(gt_indices), unit_level);
             }),
             py::arg("prompt_units"), py::arg("generated_units"), py::arg("output_indices"),
             py::arg("gt_indices") = std::nullopt, py::arg("unit_level") = UnitLevel::Sentence)
        .def_readonly("prompt_units", &Example::prompt_units)
        .def_readonly("generated_units", &Example::generated_units)
        .def_readonly("output_indices", &Example::output_indices)
        .def_readonly("gt_indices", &Example::gt_indices)
        .def_readonly("unit_level", &Example::unit_level)
        .def_property_readonly("prompt_len", &Example::prompt_len)
        .def_property_readonly("generation_len", &Example::generation_len)
        .def_property_readonly("total_len", &Example::total_len)
        .def("unit_texts", &Example::unit_texts);

    py::class_<AttributionTable>(m, "AttributionTable")
        .def(py::init(&make_table), py::arg("prompt_len"), py::arg("values"),
             py::arg("method_tag") = "", py::arg("unit_level") = UnitLevel::Sentence)
        .def_readonly("prompt_len", &AttributionTable::prompt_len)
        .def_readonly("total_len", &AttributionTable::total_len)
        .def_readonly("unit_level", &AttributionTable::unit_level)
        .def_readonly("method_tag", &AttributionTable::method_tag)
        .def_property_readonly(
            "values", [](const AttributionTable& t) { return matrix_to_rows(t.values); });

    py::class_<AttributionGraph>(m, "AttributionGraph")
        .def_readonly("prompt_len", &AttributionGraph::prompt_len)
        .def_readonly("total_len", &AttributionGraph::total_len)
        .def_readonly("mode", &AttributionGraph::mode)
        .def_readonly("method_tag", &AttributionGraph::method_tag)
        .def_readwrite("labels", &AttributionGraph::labels)
        .def_property_readonly(
            "adjacency", [](const AttributionGraph& g) { return matrix_to_rows(g.adjacency); });

    py::class_<Edge>(m, "Edge")
        .def_readonly("source", &Edge::source)
        .def_readonly("target", &Edge::target)
        .def_readonly("weight", &Edge::weight)
        .def("__repr__", [](const Edge& e) {
            return "Edge(" + std::to_string(e.source) + " -> " + std::to_string(e.target) + ", " +
                   std::to_string(e.weight) + ")";
        });

    py::class_<ContextAttribution>(m, "ContextAttribution")
        .def_readonly("scores", &ContextAttribution::scores)
        .def_readonly("output_indices", &ContextAttribution::output_indices)
        .def_readonly("method_tag", &ContextAttribution::method_tag)
        .def_readonly("mode", &ContextAttribution::mode);

    py::class_<TotalInfluenceMatrix>(m, "TotalInfluenceMatrix")
        .def_readonly("prompt_len", &TotalInfluenceMatrix::prompt_len)
        .def_readonly("total_len", &TotalInfluenceMatrix::total_len)
        .def_property_readonly(
            "values", [](const TotalInfluenceMatrix& y) { return matrix_to_rows(y.values); });

    py::class_<TruncatedDistribution>(m, "TruncatedDistribution")
        .def(py::init([](std::vector<std::pair<int, double>> entries, double tail_mass) {
                 return TruncatedDistribution{std::move(entries), tail_mass};
             }),
             py::arg("entries"), py::arg("tail_mass") = 0.0)
        .def_readonly("entries", &TruncatedDistribution::entries)
        .def_readonly("tail_mass", &TruncatedDistribution::tail_mass);

    py::class_<ScoreBackend>(m, "ScoreBackend")
        .def("eos_text", &ScoreBackend::eos_text);

    py::class_<MockModelSpec>(m, "MockModelSpec")
        .def(py::init(&make_mock_spec), py::arg("dependency"), py::arg("base_logprob"),
             py::arg("templates") = std::vector<std::string>{})
        .def_property_readonly(
            "dependency", [](const MockModelSpec& s) { return matrix_to_rows(s.dependency); })
        .def_readonly("base_logprob", &MockModelSpec::base_logprob)
        .def_readonly("templates", &MockModelSpec::templates)
        .def_property_readonly("prompt_len", &MockModelSpec::prompt_len)
        .def_static("quantize", &MockModelSpec::quantize);

    py::class_<MockBackend, ScoreBackend>(m, "MockBackend")
        .def(py::init<MockModelSpec, std::vector<std::string>>(), py::arg("spec"),
             py::arg("reference_units"));

    py::class_<HttpBackend, ScoreBackend>(m, "HttpBackend")
        .def(py::init<std::string, std::string, int, std::string>(), py::arg("base_url"),
             py::arg("auth_token") = "", py::arg("max_retries") = 3, py::arg("eos") = "</s>");

    py::class_<DeletionCurve>(m, "DeletionCurve")
        .def_readonly("fractions", &DeletionCurve::fractions)
        .def_readonly("probabilities", &DeletionCurve::probabilities)
        .def_readonly("raw_probabilities", &DeletionCurve::raw_probabilities)
        .def_readonly("ablation_order", &DeletionCurve::ablation_order)
        .def_readonly("auc", &DeletionCurve::auc)
        .def_readonly("method_tag", &DeletionCurve::method_tag)
        .def_readonly("mode", &DeletionCurve::mode);

    py::class_<SummaryRow>(m, "SummaryRow")
        .def_readonly("method", &SummaryRow::method)
        .def_readonly("mode", &SummaryRow::mode)
        .def_readonly("metric", &SummaryRow::metric)
        .def_readonly("mean", &SummaryRow::mean)
        .def_readonly("stdev", &SummaryRow::stdev)
        .def_readonly("n", &SummaryRow::n);

    py::class_<FactsParams>(m, "FactsParams")
        .def(py::init<>())
        .def_readwrite("n", &FactsParams::n)
        .def_readwrite("m", &FactsParams::m)
        .def_readwrite("k", &FactsParams::k)
        .def_readwrite("source_weight", &FactsParams::source_weight)
        .def_readwrite("reuse_weight", &FactsParams::reuse_weight)
        .def_readwrite("base_logprob", &FactsParams::base_logprob);

    py::class_<FactsExample>(m, "FactsExample")
        .def_readonly("example", &FactsExample::example)
        .def_readonly("mock", &FactsExample::mock)
        .def_readonly("source_indices", &FactsExample::source_indices);

    m.def("segment_text", &segment_text, py::arg("text"));
    m.def("aggregate_to_sentences", &aggregate_to_sentences, py::arg("table"),
          py::arg("prompt_seg"), py::arg("gen_seg"));

    m.def("build_graph", &build_graph, py::arg("table"),
          py::arg("mode") = NormalizationMode::RowStochastic);
    m.def("prune_view", &prune_view, py::arg("graph"), py::arg("threshold"));
    m.def("export_dot", &export_dot, py::arg("graph"), py::arg("threshold") = 0.0);

    m.def("propagate_step", &propagate_step, py::arg("acc"), py::arg("graph"), py::arg("node"));
    m.def("attribute_token", &attribute_token, py::arg("graph"), py::arg("node"));
    m.def("total_influence", &total_influence, py::arg("graph"));
    m.def("attribute_output", &attribute_output, py::arg("graph"), py::arg("output_indices"),
          py::arg("normalize_by_output") = false);
    m.def("row_attribution", &row_attribution, py::arg("table"), py::arg("output_indices"));

    m.def("perturbation_table", &perturbation_table, py::arg("backend"), py::arg("example"),
          py::arg("ablation_unit") = "");
    m.def(
        "clp_table",
        [](ScoreBackend& backend, const Example& example, const std::string& ablation_unit,
           int top_k, bool average_positions) {
            ClpOptions options;
            options.ablation_unit = ablation_unit;
            options.top_k = top_k;
            options.average_positions = average_positions;
            return clp_table(backend, example, options);
        },
        py::arg("backend"), py::arg("example"), py::arg("ablation_unit") = "",
        py::arg("top_k") = 16, py::arg("average_positions") = false);
    m.def("kl_truncated", &kl_truncated, py::arg("p"), py::arg("q"));
    m.def("import_table", &import_table, py::arg("path"));

    m.def("attribution_coverage", &attribution_coverage, py::arg("attribution"), py::arg("gt"));
    m.def("deletion_curve", &deletion_curve, py::arg("backend"), py::arg("example"),
          py::arg("attribution"), py::arg("ablation_unit") = "");
    m.def("faithfulness_suite", &faithfulness_suite, py::arg("backend"), py::arg("examples"),
          py::arg("attributions"), py::arg("ablation_unit") = "");

    m.def(
        "generate_facts_example",
        [](const std::vector<std::string>& pool, const FactsParams& params, std::uint64_t seed) {
            return generate_facts_example(pool, params, seed);
        },
        py::arg("pool"), py::arg("params"), py::arg("seed"));
    m.def("mock_generate", &mock_generate, py::arg("spec"), py::arg("prompt_units"));
    m.def("load_claim_pool", &load_claim_pool, py::arg("path"));
    m.def("load_examples", &load_examples, py::arg("path"));
    m.def("save_examples", &io::save_examples_jsonl, py::arg("path"), py::arg("examples"));

    m.def("save_table", &io::save_table, py::arg("path"), py::arg("table"));
    m.def("load_table", &io::load_table, py::arg("path"));
    m.def("save_graph", &io::save_graph, py::arg("path"), py::arg("graph"));
    m.def("load_graph", &io::load_graph, py::arg("path"));
    m.def("save_attribution", &io::save_attribution, py::arg("path"), py::arg("attribution"));
    m.def("load_attribution", &io::load_attribution, py::arg("path"));

    m.attr("__version__") = "0.1.0";
}
