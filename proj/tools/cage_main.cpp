// Command-line pipeline: generate synthetic corpora, compute attribution
// tables and graphs, attribute outputs, evaluate against baselines, render
// DOT views.

#include "cage/baseattr.hpp"
#include "cage/datagen.hpp"
#include "cage/graph.hpp"
#include "cage/io.hpp"
#include "cage/metrics.hpp"
#include "cage/propagation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace cage;

namespace {

struct BackendOptions {
    std::string mock_specs_path;
    std::string backend_url;
    std::string auth_token;
};

void add_backend_flags(CLI::App* cmd, BackendOptions& opts) {
    cmd->add_option("--mock-specs", opts.mock_specs_path,
                    "JSONL of mock specs aligned with --examples");
    cmd->add_option("--backend-url", opts.backend_url, "Scoring backend base URL")
        ->envname("CAGE_BACKEND_URL");
    cmd->add_option("--auth-token", opts.auth_token, "Bearer token for the backend")
        ->envname("CAGE_BACKEND_TOKEN");
}

// Per-example backend factory: mock specs pair positionally with examples,
// an HTTP backend is shared.
struct BackendSource {
    std::vector<MockModelSpec> specs;
    std::string url;
    std::string token;

    std::unique_ptr<ScoreBackend> make(const Example& example, size_t index) const {
        if (!specs.empty()) {
            if (index >= specs.size())
                throw std::runtime_error("no mock spec for example " + std::to_string(index));
            return std::make_unique<MockBackend>(specs[index], example.unit_texts());
        }
        if (!url.empty()) return std::make_unique<HttpBackend>(url, token);
        throw std::runtime_error("no backend configured; pass --mock-specs or --backend-url");
    }
};

BackendSource resolve_backend(const BackendOptions& opts) {
    BackendSource source;
    if (!opts.mock_specs_path.empty())
        source.specs = io::load_mock_specs_jsonl(opts.mock_specs_path);
    source.url = opts.backend_url;
    source.token = opts.auth_token;
    return source;
}

bool table_has_negatives(const AttributionTable& table) {
    for (double v : table.values.data())
        if (v < 0.0) return true;
    return false;
}

AttributionTable compute_table(const std::string& method, ScoreBackend* backend,
                               const Example& example, const std::string& import_path,
                               const std::string& ablation_unit, int top_k) {
    if (method == "import") {
        auto table = import_table(import_path);
        if (table.prompt_len != example.prompt_len() || table.total_len != example.total_len())
            throw std::runtime_error("imported table shape does not match the example");
        return table;
    }
    if (backend == nullptr) throw std::runtime_error("method '" + method + "' needs a backend");
    if (method == "pert") return perturbation_table(*backend, example, ablation_unit);
    if (method == "clp") {
        ClpOptions options;
        options.ablation_unit = ablation_unit;
        options.top_k = top_k;
        return clp_table(*backend, example, options);
    }
    throw std::runtime_error("unknown method: " + method);
}

std::vector<std::string> unit_labels(const Example& example) {
    std::vector<std::string> labels;
    for (int i = 0; i < example.prompt_len(); ++i)
        labels.push_back("p" + std::to_string(i + 1) + ": " + example.prompt_units[i].text);
    for (int i = 0; i < example.generation_len(); ++i)
        labels.push_back("g" + std::to_string(i + 1) + ": " + example.generated_units[i].text);
    return labels;
}

void print_prompt_summary(const Example& example, const ContextAttribution& cage_attr,
                          const ContextAttribution& row_attr) {
    double cage_sum = 0.0;
    std::printf("%-6s %-12s %-12s %s\n", "unit", "graph", "row", "text");
    for (int j = 0; j < example.prompt_len(); ++j) {
        cage_sum += cage_attr.scores[j];
        std::string text = example.prompt_units[j].text;
        if (text.size() > 48) text = text.substr(0, 45) + "...";
        std::printf("p%-5d %-12.6f %-12.6f %s\n", j + 1, cage_attr.scores[j], row_attr.scores[j],
                    text.c_str());
    }
    std::printf("prompt-slice sum %.9f over |output| = %zu\n", cage_sum,
                cage_attr.output_indices.size());
}

int cmd_generate(const std::string& pool_path, int n, int m, int k, int count,
                 std::uint64_t seed, double source_weight, double reuse_weight,
                 double base_logprob, const std::string& out_dir) {
    const auto pool = load_claim_pool(pool_path);
    FactsParams params;
    params.n = n;
    params.m = m;
    params.k = k;
    params.source_weight = source_weight;
    params.reuse_weight = reuse_weight;
    params.base_logprob = base_logprob;

    std::vector<Example> examples;
    std::vector<MockModelSpec> specs;
    for (int i = 0; i < count; ++i) {
        auto fx = generate_facts_example(pool, params, seed + static_cast<std::uint64_t>(i));
        examples.push_back(std::move(fx.example));
        specs.push_back(std::move(fx.mock));
    }
    fs::create_directories(out_dir);
    io::save_examples_jsonl((fs::path(out_dir) / "examples.jsonl").string(), examples);
    io::save_mock_specs_jsonl((fs::path(out_dir) / "mockspecs.jsonl").string(), specs);
    std::printf("wrote %d examples to %s\n", count, out_dir.c_str());
    return 0;
}

int cmd_attribute(const std::string& examples_path, size_t index,
                  const BackendOptions& backend_opts, const std::string& method,
                  const std::string& mode_name, const std::string& import_path,
                  const std::string& ablation_unit, int top_k, bool normalize_by_output,
                  const std::string& out_dir) {
    const auto examples = load_examples(examples_path);
    if (examples.empty()) throw std::runtime_error("no examples in " + examples_path);
    if (index >= examples.size()) throw std::runtime_error("example index out of range");
    const auto& example = examples[index];
    const auto mode = normalization_mode_from_string(mode_name);

    std::unique_ptr<ScoreBackend> backend;
    if (method != "import") backend = resolve_backend(backend_opts).make(example, index);

    const auto table =
        compute_table(method, backend.get(), example, import_path, ablation_unit, top_k);
    if (mode == NormalizationMode::RawPassthrough && table_has_negatives(table))
        std::fprintf(stderr,
                     "warning: mode 'none' propagates negative scores; expect unstable "
                     "attributions\n");

    auto graph = build_graph(table, mode);
    graph.labels = unit_labels(example);

    const auto cage_attr = attribute_output(graph, example.output_indices, normalize_by_output);
    const auto row_attr = row_attribution(table, example.output_indices);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    io::save_table((dir / "table.json").string(), table);
    io::save_graph((dir / "graph.json").string(), graph);
    io::save_attribution((dir / "cage_attribution.json").string(), cage_attr);
    io::save_attribution((dir / "row_attribution.json").string(), row_attr);

    print_prompt_summary(example, cage_attr, row_attr);
    return 0;
}

int cmd_evaluate(const std::string& examples_path, const BackendOptions& backend_opts,
                 const std::string& method, const std::string& mode_name,
                 const std::string& import_dir, const std::string& ablation_unit, int top_k,
                 bool normalize_by_output, bool ac_only, const std::string& out_path,
                 const std::string& curves_out) {
    const auto examples = load_examples(examples_path);
    if (examples.empty()) throw std::runtime_error("no examples in " + examples_path);
    const auto mode = normalization_mode_from_string(mode_name);
    const auto source = resolve_backend(backend_opts);

    std::vector<ContextAttribution> cage_attrs, row_attrs;
    std::vector<double> cage_ac, row_ac;
    std::vector<DeletionCurve> curves;

    for (size_t i = 0; i < examples.size(); ++i) {
        const auto& example = examples[i];
        const bool needs_backend = method != "import" || !ac_only;
        std::unique_ptr<ScoreBackend> backend;
        if (needs_backend) backend = source.make(example, i);

        std::string import_path;
        if (method == "import")
            import_path =
                (fs::path(import_dir) / ("table_" + std::to_string(i) + ".json")).string();
        const auto table =
            compute_table(method, backend.get(), example, import_path, ablation_unit, top_k);

        const auto graph = build_graph(table, mode);
        auto cage_attr = attribute_output(graph, example.output_indices, normalize_by_output);
        auto row_attr = row_attribution(table, example.output_indices);

        if (example.gt_indices) {
            cage_ac.push_back(attribution_coverage(cage_attr, *example.gt_indices));
            row_ac.push_back(attribution_coverage(row_attr, *example.gt_indices));
        }
        if (!ac_only) {
            curves.push_back(deletion_curve(*backend, example, cage_attr, ablation_unit));
            curves.push_back(deletion_curve(*backend, example, row_attr, ablation_unit));
        }
        cage_attrs.push_back(std::move(cage_attr));
        row_attrs.push_back(std::move(row_attr));
    }

    std::vector<SummaryRow> rows;
    auto add_row = [&](const std::vector<double>& values, const std::string& tag,
                       const std::string& mode_str, const char* metric) {
        if (values.empty()) return;
        const auto [mean, stdev] = mean_and_stdev(values);
        rows.push_back({tag, mode_str, metric, mean, stdev, static_cast<int>(values.size())});
    };
    add_row(cage_ac, cage_attrs.front().method_tag, to_string(mode), "attribution_coverage");
    add_row(row_ac, row_attrs.front().method_tag, to_string(row_attrs.front().mode),
            "attribution_coverage");

    if (!ac_only) {
        std::vector<double> cage_aucs, row_aucs;
        for (size_t c = 0; c < curves.size(); c += 2) cage_aucs.push_back(curves[c].auc);
        for (size_t c = 1; c < curves.size(); c += 2) row_aucs.push_back(curves[c].auc);
        add_row(cage_aucs, cage_attrs.front().method_tag, to_string(mode), "deletion_auc");
        add_row(row_aucs, row_attrs.front().method_tag, to_string(row_attrs.front().mode),
                "deletion_auc");
    }

    if (rows.empty())
        throw std::runtime_error("nothing to evaluate: no ground truth for coverage and curves "
                                 "were skipped");
    if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    io::save_summary_tsv(out_path, rows);
    if (!curves_out.empty() && !curves.empty()) {
        std::ostringstream ss;
        for (const auto& c : curves) ss << io::to_json(c).dump() << "\n";
        io::write_text_file(curves_out, ss.str());
    }
    std::printf("%s", io::summary_to_tsv(rows).c_str());
    return 0;
}

int cmd_render(const std::string& graph_path, double threshold, const std::string& out_path) {
    const auto graph = io::load_graph(graph_path);
    if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    io::write_text_file(out_path, export_dot(graph, threshold));
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal attribution graphs over autoregressive generations"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a config file");

    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic corpus");
    std::string pool_path = "data/claims.txt";
    int n = 5, m = 3, k = 2, count = 1;
    std::uint64_t seed = 1;
    double source_weight = 2.0, reuse_weight = 1.0, base_logprob = -1.0;
    std::string gen_out_dir = "out";
    generate->add_option("--pool", pool_path, "Claim pool, one claim per line");
    generate->add_option("--n", n, "Claims per prompt");
    generate->add_option("--m", m, "Claims repeated by the generation");
    generate->add_option("--k", k, "Trailing generations marked as output");
    generate->add_option("--count", count, "Number of examples");
    generate->add_option("--seed", seed, "Base seed; example i uses seed+i");
    generate->add_option("--source-weight", source_weight, "Mock dependency on the source claim");
    generate->add_option("--reuse-weight", reuse_weight, "Mock dependency on prior generations");
    generate->add_option("--base-logprob", base_logprob, "Mock base log-probability per unit");
    generate->add_option("--out-dir", gen_out_dir, "Output directory");

    auto* attribute =
        app.add_subcommand("attribute", "Table, graph and attributions for one example");
    std::string examples_path;
    size_t index = 0;
    BackendOptions attribute_backend;
    std::string method = "pert", mode_name = "sum1", import_path, ablation_unit;
    int top_k = 16;
    bool normalize_by_output = false;
    std::string out_dir = "out";
    attribute->add_option("--examples", examples_path, "Example corpus (JSONL)")->required();
    attribute->add_option("--index", index, "Example index within the corpus");
    add_backend_flags(attribute, attribute_backend);
    attribute->add_option("--method", method, "Base method: pert, clp or import")
        ->check(CLI::IsMember({"pert", "clp", "import"}));
    attribute->add_option("--mode", mode_name, "Normalization: sum1, clamp or none")
        ->check(CLI::IsMember({"sum1", "clamp", "none"}));
    attribute->add_option("--import-path", import_path, "Table file for --method import");
    attribute->add_option("--ablation-unit", ablation_unit, "Replacement text for perturbations");
    attribute->add_option("--top-k", top_k, "Distribution truncation for clp");
    attribute->add_flag("--normalize-by-output", normalize_by_output,
                        "Divide the attribution by the output size");
    attribute->add_option("--out-dir", out_dir, "Output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Coverage and faithfulness over a corpus");
    std::string eval_examples, eval_method = "pert", eval_mode = "sum1", import_dir;
    BackendOptions eval_backend;
    std::string eval_ablation;
    int eval_top_k = 16;
    bool eval_normalize = false, ac_only = false;
    std::string summary_out = "out/summary.tsv", curves_out;
    evaluate->add_option("--examples", eval_examples, "Example corpus (JSONL)")->required();
    add_backend_flags(evaluate, eval_backend);
    evaluate->add_option("--method", eval_method, "Base method: pert, clp or import")
        ->check(CLI::IsMember({"pert", "clp", "import"}));
    evaluate->add_option("--mode", eval_mode, "Normalization: sum1, clamp or none")
        ->check(CLI::IsMember({"sum1", "clamp", "none"}));
    evaluate->add_option("--import-dir", import_dir, "Directory of table_<i>.json for import");
    evaluate->add_option("--ablation-unit", eval_ablation, "Replacement text for perturbations");
    evaluate->add_option("--top-k", eval_top_k, "Distribution truncation for clp");
    evaluate->add_flag("--normalize-by-output", eval_normalize,
                       "Divide attributions by the output size");
    evaluate->add_flag("--ac-only", ac_only, "Coverage only; skip deletion curves");
    evaluate->add_option("--out", summary_out, "Summary TSV path");
    evaluate->add_option("--curves-out", curves_out, "Optional JSONL of deletion curves");

    auto* render = app.add_subcommand("render", "Export a graph file as DOT");
    std::string graph_path, dot_out = "out/graph.dot";
    double threshold = 0.0;
    render->add_option("--graph", graph_path, "Graph file")->required();
    render->add_option("--threshold", threshold, "Prune edges below this weight");
    render->add_option("--out", dot_out, "DOT output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return cmd_generate(pool_path, n, m, k, count, seed, source_weight, reuse_weight,
                                base_logprob, gen_out_dir);
        if (attribute->parsed())
            return cmd_attribute(examples_path, index, attribute_backend, method, mode_name,
                                 import_path, ablation_unit, top_k, normalize_by_output, out_dir);
        if (evaluate->parsed())
            return cmd_evaluate(eval_examples, eval_backend, eval_method, eval_mode, import_dir,
                                eval_ablation, eval_top_k, eval_normalize, ac_only, summary_out,
                                curves_out);
        if (render->parsed()) return cmd_render(graph_path, threshold, dot_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
