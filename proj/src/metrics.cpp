#include "cage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace cage {

double attribution_coverage(const ContextAttribution& attribution, const std::set<int>& gt) {
    if (gt.empty()) throw std::invalid_argument("attribution_coverage: empty ground-truth set");
    const int p = static_cast<int>(attribution.scores.size());
    for (int idx : gt) {
        if (idx < 0 || idx >= p)
            throw std::invalid_argument("attribution_coverage: gt index out of range");
    }

    const double total = std::accumulate(attribution.scores.begin(), attribution.scores.end(), 0.0);
    if (total == 0.0) return 0.0;  // no unit can fall inside the window

    const double expected = 1.0 / static_cast<double>(gt.size());
    const double lo = 0.5 * expected;
    const double hi = 1.5 * expected;
    int hits = 0;
    for (int idx : gt) {
        const double share = attribution.scores[idx] / total;
        if (share >= lo && share <= hi) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

DeletionCurve deletion_curve(ScoreBackend& backend, const Example& example,
                             const ContextAttribution& attribution,
                             const std::string& ablation_unit) {
    example.validate();
    const int p = example.prompt_len();
    if (static_cast<int>(attribution.scores.size()) != p)
        throw std::invalid_argument("deletion_curve: attribution length does not match prompt");

    const std::string replacement = ablation_unit.empty() ? backend.eos_text() : ablation_unit;

    // Descending score, ties by ascending prompt index.
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (attribution.scores[a] != attribution.scores[b])
            return attribution.scores[a] > attribution.scores[b];
        return a < b;
    });

    // All ablation sets are known up front, so the P+1 scoring calls batch.
    const auto base_units = example.unit_texts();
    std::vector<ScoreRequest> requests(p + 1);
    requests[0].units = base_units;
    auto units = base_units;
    for (int k = 1; k <= p; ++k) {
        units[order[k - 1]] = replacement;
        requests[k].units = units;
    }
    const auto responses = score_batch(backend, requests);

    auto output_logprob = [&](const ScoreResponse& resp) {
        double lp = 0.0;
        for (int idx : example.output_indices) lp += resp.unit_logprobs[p + idx];
        return lp;
    };

    DeletionCurve curve;
    curve.method_tag = attribution.method_tag;
    curve.mode = attribution.mode;
    curve.ablation_order = order;
    const double lp0 = output_logprob(responses[0]);
    for (int k = 0; k <= p; ++k) {
        curve.fractions.push_back(static_cast<double>(k) / static_cast<double>(p));
        const double raw = k == 0 ? 1.0 : std::exp(output_logprob(responses[k]) - lp0);
        curve.raw_probabilities.push_back(raw);
        curve.probabilities.push_back(std::clamp(raw, 0.0, 1.0));
    }
    double auc = 0.0;
    for (int k = 0; k < p; ++k) {
        auc += 0.5 * (curve.probabilities[k] + curve.probabilities[k + 1]) *
               (curve.fractions[k + 1] - curve.fractions[k]);
    }
    curve.auc = auc;
    return curve;
}

std::pair<double, double> mean_and_stdev(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_and_stdev: empty input");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

std::vector<SummaryRow> faithfulness_suite(ScoreBackend& backend,
                                           const std::vector<Example>& examples,
                                           const std::vector<ContextAttribution>& attributions,
                                           const std::string& ablation_unit) {
    if (examples.empty()) throw std::invalid_argument("faithfulness_suite: empty input");
    if (examples.size() != attributions.size())
        throw std::invalid_argument("faithfulness_suite: example/attribution lists are not aligned");

    // Group AUCs by (method, mode) in first-appearance order.
    std::vector<std::pair<std::string, std::string>> group_order;
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (size_t i = 0; i < examples.size(); ++i) {
        const auto curve = deletion_curve(backend, examples[i], attributions[i], ablation_unit);
        const auto key = std::make_pair(attributions[i].method_tag,
                                        std::string(to_string(attributions[i].mode)));
        if (groups.find(key) == groups.end()) group_order.push_back(key);
        groups[key].push_back(curve.auc);
    }

    std::vector<SummaryRow> rows;
    rows.reserve(group_order.size());
    for (const auto& key : group_order) {
        const auto& aucs = groups[key];
        const auto [mean, stdev] = mean_and_stdev(aucs);
        rows.push_back({key.first, key.second, "deletion_auc", mean, stdev,
                        static_cast<int>(aucs.size())});
    }
    return rows;
}

}  // namespace cage
