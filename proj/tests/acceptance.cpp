// Acceptance suite: end-to-end checks of the library's contracts, one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include "cage/baseattr.hpp"
#include "cage/datagen.hpp"
#include "cage/graph.hpp"
#include "cage/io.hpp"
#include "cage/metrics.hpp"
#include "cage/propagation.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

using namespace cage;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
    int id;
    std::string title;
    bool passed;
    std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& title, bool passed, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", passed ? "PASS" : "FAIL", id, title.c_str(),
                detail.c_str());
    g_results.push_back({id, title, passed, detail});
}

std::vector<int> ranking(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

AttributionTable table_from_rows(int prompt_len, const std::vector<std::vector<double>>& rows) {
    AttributionTable t;
    t.prompt_len = prompt_len;
    t.total_len = prompt_len + static_cast<int>(rows.size());
    t.unit_level = UnitLevel::Sentence;
    t.method_tag = "crafted";
    t.values = Matrix(static_cast<int>(rows.size()), t.total_len);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) t.values(int(i), int(j)) = rows[i][j];
    return t;
}

const std::vector<std::string> kPool = {
    "Water boils at 100 degrees Celsius at sea level.",
    "The Nile flows north into the Mediterranean.",
    "Honey never spoils when stored sealed.",
    "Octopuses have three hearts.",
    "Mount Everest grows a few millimeters each year.",
    "Venus rotates in the opposite direction to Earth.",
    "Bananas are botanically berries.",
    "Sound travels faster in water than in air.",
    "The Eiffel Tower grows taller in summer heat.",
    "Sharks existed before trees did.",
};

// ---------------------------------------------------------------------------

void criterion_1_row_stochastic_construction() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> p_dist(1, 32), y_dist(1, 32);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    long checked_rows = 0;
    int degenerate_rows = 0;
    bool ok = true;
    std::string why;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const int p = p_dist(rng);
        const int t = std::min(64, p + y_dist(rng));
        auto table = testing::random_table(rng, p, t, 0.35, 0.25);
        for (int i = 0; i < table.values.rows(); ++i) {
            if (coin(rng) < 0.1) {  // force a degenerate row
                for (int j = 0; j < p + i; ++j)
                    table.values(i, j) = -std::abs(table.values(i, j));
            }
        }
        const auto g = build_graph(table, NormalizationMode::RowStochastic);
        for (int i = 0; i < g.adjacency.rows() && ok; ++i) {
            const int preceding = p + i;
            double sum = 0.0;
            bool all_nonpositive = true;
            for (int j = 0; j < preceding; ++j) {
                if (table.values(i, j) > 0.0) all_nonpositive = false;
                if (g.adjacency(i, j) < 0.0) {
                    ok = false;
                    why = "negative entry";
                }
                sum += g.adjacency(i, j);
            }
            for (int j = preceding; j < t; ++j) {
                if (g.adjacency(i, j) != 0.0) {
                    ok = false;
                    why = "causality violated";
                }
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                ok = false;
                why = "row sum off by " + std::to_string(sum - 1.0);
            }
            if (all_nonpositive) {
                ++degenerate_rows;
                const double uniform = 1.0 / static_cast<double>(preceding);
                for (int j = 0; j < preceding; ++j) {
                    if (g.adjacency(i, j) != uniform) {
                        ok = false;
                        why = "degenerate row not exactly uniform";
                    }
                }
            }
            ++checked_rows;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) {
        ok = false;
        why = "over time budget";
    }
    std::ostringstream detail;
    detail << checked_rows << " rows, " << degenerate_rows << " degenerate, " << elapsed << " s";
    if (!ok) detail << "; " << why;
    report(1, "row-stochastic construction on 1000 random tables", ok, detail.str());
}

void criterion_2_propagation_matches_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1002);
    std::uniform_int_distribution<int> p_dist(1, 6), y_dist(1, 8);

    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int p = p_dist(rng);
        const int t = std::min(10, p + y_dist(rng));
        const auto mode = trial % 2 == 0 ? NormalizationMode::RowStochastic
                                         : NormalizationMode::RawPassthrough;
        const auto g = testing::random_graph(rng, p, t, mode);
        const auto y = total_influence(g);
        for (int node = p; node < t && ok; ++node) {
            const auto got = attribute_token(g, node).scores;
            const auto want = testing::attribution_via_paths(g, node);
            for (int j = 0; j < p; ++j) {
                worst = std::max(worst, std::abs(got[j] - want[j]));
                worst = std::max(worst, std::abs(y.values(node - p, j) - got[j]));
            }
            if (worst > 1e-9) ok = false;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 10.0) ok = false;
    std::ostringstream detail;
    detail << "200 graphs, both modes, max deviation " << worst << ", " << elapsed << " s";
    report(2, "propagation matches the all-paths oracle", ok, detail.str());
}

void criterion_3_conservation() {
    std::mt19937_64 rng(1003);
    std::uniform_int_distribution<int> p_dist(1, 8), y_dist(1, 10);

    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 500 && ok; ++trial) {
        const int p = p_dist(rng);
        const int t = p + y_dist(rng);
        const auto g = testing::random_graph(rng, p, t);
        for (int node = p; node < t; ++node) {
            const auto scores = attribute_token(g, node).scores;
            const double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        std::set<int> output;
        const int gen = t - p;
        const int k = 1 + static_cast<int>(rng() % gen);
        while (static_cast<int>(output.size()) < k)
            output.insert(static_cast<int>(rng() % gen));
        const auto a = attribute_output(g, output);
        const double sum = std::accumulate(a.scores.begin(), a.scores.end(), 0.0);
        worst = std::max(worst, std::abs(sum - static_cast<double>(output.size())));
        if (worst > 1e-8) ok = false;
    }
    std::ostringstream detail;
    detail << "500 graphs, max conservation error " << worst;
    report(3, "prompt-slice mass conservation", ok, detail.str());
}

void criterion_4_degenerate_equivalence() {
    std::mt19937_64 rng(1004);
    std::uniform_int_distribution<int> p_dist(2, 8), y_dist(1, 6);

    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int p = p_dist(rng);
        const int t = p + y_dist(rng);
        auto table = testing::random_table(rng, p, t, /*negative_fraction=*/0.0, 0.3);
        for (int i = 0; i < table.values.rows(); ++i) {
            for (int j = p; j < t; ++j) table.values(i, j) = 0.0;
            // Keep rows non-degenerate: the uniform fallback would otherwise
            // reconnect prior generations by design.
            table.values(i, static_cast<int>(rng() % p)) += 0.5;
        }
        const auto g = build_graph(table, NormalizationMode::RowStochastic);
        for (int idx = 0; idx < table.generation_len(); ++idx) {
            const auto cage_rank = ranking(attribute_token(g, p + idx).scores);
            const auto row_rank = ranking(row_attribution(table, {idx}).scores);
            if (cage_rank != row_rank) ++mismatches;
        }
    }
    std::ostringstream detail;
    detail << "100 instances, " << mismatches << " ranking mismatches";
    report(4, "degenerate tables reduce to row attribution", mismatches == 0, detail.str());
}

void criterion_5_mock_oracle_base_method() {
    std::mt19937_64 rng(1005);
    bool ok = true;
    int specs = 0;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const int p = 2 + static_cast<int>(rng() % 5);
        const int y = 1 + static_cast<int>(rng() % 5);
        const auto spec = testing::random_mock_spec(rng, p, y);
        const auto example = mock_generate(spec, testing::mock_prompt_units(p));
        MockBackend backend(spec, example.unit_texts());
        const auto table = perturbation_table(backend, example);
        for (int i = 0; i < y && ok; ++i)
            for (int j = 0; j < p + y; ++j)
                if (table.values(i, j) != spec.dependency(i, j)) ok = false;
        ++specs;
    }
    std::ostringstream detail;
    detail << specs << " random specs, bitwise comparison";
    report(5, "perturbation reproduces the mock dependency matrix", ok, detail.str());
}

void criterion_6_reuse_tracking_effect() {
    FactsParams params;  // defaults: source 2.0, reuse 1.0
    const double ws = params.source_weight, wr = params.reuse_weight;

    // Closed forms for n=5, m=3, k=2 with the output being the last two
    // generations: the first generation's source is reached only through
    // reuse edges.
    const double a21 = wr / (ws + wr);             // edge g2 <- g1
    const double a2s = ws / (ws + wr);             // edge g2 <- source2
    const double a31 = wr / (ws + 2.0 * wr);       // edge g3 <- g1
    const double a32 = wr / (ws + 2.0 * wr);       // edge g3 <- g2
    const double a3s = ws / (ws + 2.0 * wr);       // edge g3 <- source3
    const double expect_src1 = a21 + a31 + a32 * a21;
    const double expect_src2 = a2s + a32 * a2s;
    const double expect_src3 = a3s;

    bool ok = true;
    std::string why;
    double min_ratio_lhs = 1e300;
    for (std::uint64_t seed = 1; seed <= 50 && ok; ++seed) {
        const auto fx = generate_facts_example(kPool, params, seed);
        MockBackend backend(fx.mock, fx.example.unit_texts());
        const auto table = perturbation_table(backend, fx.example);
        const auto graph = build_graph(table, NormalizationMode::RowStochastic);
        const auto cage = attribute_output(graph, fx.example.output_indices);
        const auto row = row_attribution(table, fx.example.output_indices);

        const int reuse_unit = fx.source_indices[0];  // source of the non-output generation
        if (!(cage.scores[reuse_unit] >= 10.0 * row.scores[reuse_unit]) ||
            cage.scores[reuse_unit] <= 0.0) {
            ok = false;
            why = "reuse-tracked unit not amplified";
        }
        min_ratio_lhs = std::min(min_ratio_lhs, cage.scores[reuse_unit]);

        for (int j = 0; j < fx.example.prompt_len(); ++j) {
            double expect = 0.0;
            if (j == fx.source_indices[0]) expect = expect_src1;
            if (j == fx.source_indices[1]) expect = expect_src2;
            if (j == fx.source_indices[2]) expect = expect_src3;
            if (std::abs(cage.scores[j] - expect) > 1e-6) {
                ok = false;
                why = "closed-form mismatch at prompt " + std::to_string(j + 1);
            }
        }
    }
    std::ostringstream detail;
    detail << "50 seeds; reuse-unit attribution " << min_ratio_lhs << " vs row 0";
    if (!ok) detail << "; " << why;
    report(6, "reuse-tracking shows up in graph attributions only", ok, detail.str());
}

void criterion_7_attribution_coverage() {
    ContextAttribution uniform;
    uniform.scores = {0.0, 0.5, 0.0, 0.5};
    ContextAttribution off_target;
    off_target.scores = {0.0, 0.0, 1.0, 0.0};
    ContextAttribution worked;
    worked.scores = {0.6, 0.1, 0.2, 0.1};

    const bool ok = attribution_coverage(uniform, {1, 3}) == 1.0 &&
                    attribution_coverage(off_target, {0, 1}) == 0.0 &&
                    attribution_coverage(worked, {0, 1}) == 0.5;
    report(7, "attribution coverage hits its anchor cases exactly", ok,
           "uniform=1.0, missed=0.0, window case=0.5");
}

std::vector<double> scores_for_order(const std::vector<int>& order, int p) {
    std::vector<double> scores(p, 0.0);
    for (size_t rank = 0; rank < order.size(); ++rank)
        scores[order[rank]] = static_cast<double>(p - rank);
    return scores;
}

void criterion_8_faithfulness_direction() {
    const auto start = Clock::now();
    FactsParams params;  // default reuse-tracking corpus

    std::vector<double> cage_aucs, row_aucs;
    bool ordering_ok = true;
    std::mt19937_64 rng(1008);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto fx = generate_facts_example(kPool, params, seed);
        MockBackend backend(fx.mock, fx.example.unit_texts());
        const int p = fx.example.prompt_len();

        const auto table = perturbation_table(backend, fx.example);
        const auto graph = build_graph(table, NormalizationMode::RowStochastic);
        const auto cage = attribute_output(graph, fx.example.output_indices);
        const auto row = row_attribution(table, fx.example.output_indices);
        cage_aucs.push_back(deletion_curve(backend, fx.example, cage).auc);
        row_aucs.push_back(deletion_curve(backend, fx.example, row).auc);

        // Ablating ground-truth units first is never worse than a random order.
        std::vector<int> gt_first;
        for (int idx : *fx.example.gt_indices) gt_first.push_back(idx);
        for (int j = 0; j < p; ++j)
            if (!fx.example.gt_indices->count(j)) gt_first.push_back(j);
        ContextAttribution gt_attr;
        gt_attr.scores = scores_for_order(gt_first, p);
        const double gt_auc = deletion_curve(backend, fx.example, gt_attr).auc;

        for (int r = 0; r < 20; ++r) {
            std::vector<int> perm(p);
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = p - 1; i > 0; --i)
                std::swap(perm[i], perm[static_cast<int>(rng() % (i + 1))]);
            ContextAttribution rand_attr;
            rand_attr.scores = scores_for_order(perm, p);
            const double rand_auc = deletion_curve(backend, fx.example, rand_attr).auc;
            if (gt_auc > rand_auc + 1e-12) ordering_ok = false;
        }
    }

    const double cage_mean = mean_and_stdev(cage_aucs).first;
    const double row_mean = mean_and_stdev(row_aucs).first;
    const bool direction_ok = cage_mean < row_mean;
    const double elapsed = seconds_since(start);
    const bool ok = direction_ok && ordering_ok && elapsed < 60.0;

    std::ostringstream detail;
    detail << "mean auc graph=" << cage_mean << " row=" << row_mean
           << (direction_ok ? "" : " [strict improvement not attained: the mock's"
                                   " ablation effects are exactly additive, so ordering by"
                                   " summed per-unit drops is already optimal]")
           << "; gt-first <= 400 random orderings: " << (ordering_ok ? "yes" : "NO") << "; "
           << elapsed << " s";
    report(8, "deletion-curve faithfulness direction", ok, detail.str());
}

void criterion_9_ablation_failure_modes() {
    // Signed two-hop table: passthrough propagation breaks conservation and
    // flips signs relative to the row-stochastic construction.
    const auto signed_table = table_from_rows(2, {{1.5, -0.5}, {0.5, 0.5, -2.0}});
    const auto raw = build_graph(signed_table, NormalizationMode::RawPassthrough);
    const auto strict = build_graph(signed_table, NormalizationMode::RowStochastic);
    const auto raw_attr = attribute_token(raw, 3).scores;
    const auto strict_attr = attribute_token(strict, 3).scores;

    const double raw_sum = std::accumulate(raw_attr.begin(), raw_attr.end(), 0.0);
    const bool sum_broken = std::abs(raw_sum - 1.0) > 0.5;
    bool sign_flip = false;
    for (size_t j = 0; j < raw_attr.size(); ++j)
        if (raw_attr[j] * strict_attr[j] < 0.0) sign_flip = true;

    // Unnormalized nonnegative weights grow along the two-hop path.
    const auto growth_table = table_from_rows(2, {{2.0, 1.0}, {1.0, 0.0, 3.0}});
    const auto clamped = build_graph(growth_table, NormalizationMode::NonNegativeOnly);
    const auto grown = attribute_token(clamped, 3).scores;
    const double grown_sum = std::accumulate(grown.begin(), grown.end(), 0.0);
    const bool growth_shown = grown_sum > 1.0;

    const bool ok = sum_broken && sign_flip && growth_shown;
    std::ostringstream detail;
    detail << "raw prompt-slice sum " << raw_sum << ", sign flip " << (sign_flip ? "yes" : "no")
           << ", clamp-only sum " << grown_sum;
    report(9, "relaxed normalization reproduces the documented failure modes", ok, detail.str());
}

void criterion_10_serialization() {
    std::mt19937_64 rng(1010);
    bool ok = true;
    std::string why;

    for (int trial = 0; trial < 20 && ok; ++trial) {
        const auto table = testing::random_table(rng, 3, 9);
        io::save_table("acc_table.json", table);
        if (io::load_table("acc_table.json").values.data() != table.values.data()) {
            ok = false;
            why = "table round trip not bitwise";
        }

        const auto graph = testing::random_graph(rng, 3, 9);
        io::save_graph("acc_graph.json", graph);
        if (io::load_graph("acc_graph.json").adjacency.data() != graph.adjacency.data()) {
            ok = false;
            why = "graph round trip not bitwise";
        }

        const auto attr = attribute_token(graph, 5);
        io::save_attribution("acc_attr.json", attr);
        if (io::load_attribution("acc_attr.json").scores != attr.scores) {
            ok = false;
            why = "attribution round trip not bitwise";
        }
    }
    std::remove("acc_table.json");
    std::remove("acc_graph.json");
    std::remove("acc_attr.json");

    io::write_text_file("acc_bad_table.json",
                        R"({"prompt_len": 2, "total_len": 4,
                            "values": [0.1, 0.2, 0.0, 0.0, 0.3, 0.4, 0.5, 0.9]})");
    bool rejected = false;
    try {
        import_table("acc_bad_table.json");
    } catch (const CausalityError& e) {
        rejected = e.row == 1 && e.col == 3 &&
                   std::string(e.what()).find("row 1, col 3") != std::string::npos;
    }
    std::remove("acc_bad_table.json");
    if (!rejected) {
        ok = false;
        why = "causality violation not rejected with its position";
    }

    std::ostringstream detail;
    detail << "20 bitwise round trips per artifact; violating import rejected";
    if (!ok) detail << "; " << why;
    report(10, "serialization round-trips and import gating", ok, detail.str());
}

}  // namespace

int main() {
    criterion_1_row_stochastic_construction();
    criterion_2_propagation_matches_oracle();
    criterion_3_conservation();
    criterion_4_degenerate_equivalence();
    criterion_5_mock_oracle_base_method();
    criterion_6_reuse_tracking_effect();
    criterion_7_attribution_coverage();
    criterion_8_faithfulness_direction();
    criterion_9_ablation_failure_modes();
    criterion_10_serialization();

    int failed = 0;
    for (const auto& c : g_results)
        if (!c.passed) ++failed;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
                g_results.size());
    return failed == 0 ? 0 : 1;
}
