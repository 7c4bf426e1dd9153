#include "cage/baseattr.hpp"

#include "cage/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cage {

namespace {

// Requests shared by both perturbation methods: index 0 is the unperturbed
// sequence, request 1+j perturbs unit j. The last generated unit influences
// nothing, so it is never perturbed.
std::vector<ScoreRequest> build_perturbation_requests(const Example& example,
                                                      const std::string& replacement,
                                                      bool want_distributions, int top_k) {
    const auto base_units = example.unit_texts();
    const int perturbable = example.total_len() - 1;

    std::vector<ScoreRequest> requests;
    requests.reserve(perturbable + 1);
    ScoreRequest full;
    full.units = base_units;
    full.want_distributions = want_distributions;
    full.top_k = top_k;
    requests.push_back(full);
    for (int j = 0; j < perturbable; ++j) {
        ScoreRequest req = full;
        req.units[j] = replacement;
        requests.push_back(std::move(req));
    }
    return requests;
}

AttributionTable empty_table(const Example& example, std::string method_tag) {
    AttributionTable table;
    table.prompt_len = example.prompt_len();
    table.total_len = example.total_len();
    table.unit_level = example.unit_level;
    table.method_tag = std::move(method_tag);
    table.values = Matrix(example.generation_len(), example.total_len());
    return table;
}

}  // namespace

AttributionTable perturbation_table(ScoreBackend& backend, const Example& example,
                                    const std::string& ablation_unit) {
    example.validate();
    if (example.unit_level != UnitLevel::Sentence)
        throw std::invalid_argument("perturbation_table: example must be at sentence level");

    const std::string replacement = ablation_unit.empty() ? backend.eos_text() : ablation_unit;
    const auto requests = build_perturbation_requests(example, replacement, false, 0);
    const auto responses = score_batch(backend, requests);

    auto table = empty_table(example, "pert");
    const int p = example.prompt_len();
    for (int t = 0; t < example.generation_len(); ++t) {
        const double full_lp = responses[0].unit_logprobs[p + t];
        for (int j = 0; j < p + t; ++j)
            table.values(t, j) = full_lp - responses[1 + j].unit_logprobs[p + t];
    }
    return table;
}

double kl_truncated(const TruncatedDistribution& p, const TruncatedDistribution& q) {
    constexpr double kFloor = 1e-12;

    std::map<int, double> q_probs;
    for (const auto& [id, prob] : q.entries) q_probs[id] = prob;

    double kl = 0.0;
    for (const auto& [id, p_prob] : p.entries) {
        if (p_prob <= 0.0) continue;
        const auto it = q_probs.find(id);
        const double q_prob = std::max(it != q_probs.end() ? it->second : 0.0, kFloor);
        kl += p_prob * std::log(p_prob / q_prob);
    }
    if (p.tail_mass > 0.0)
        kl += p.tail_mass * std::log(p.tail_mass / std::max(q.tail_mass, kFloor));
    return kl;
}

AttributionTable clp_table(ScoreBackend& backend, const Example& example,
                           const ClpOptions& options) {
    example.validate();
    if (example.unit_level != UnitLevel::Sentence)
        throw std::invalid_argument("clp_table: example must be at sentence level");
    if (options.top_k < 1) throw std::invalid_argument("clp_table: top_k must be >= 1");

    const std::string replacement =
        options.ablation_unit.empty() ? backend.eos_text() : options.ablation_unit;
    const auto requests =
        build_perturbation_requests(example, replacement, true, options.top_k);
    std::vector<ScoreResponse> responses;
    try {
        responses = score_batch(backend, requests, options.max_in_flight);
    } catch (const DistributionsUnavailableError&) {
        throw DistributionsUnavailableError(
            "distributions unavailable; use perturbation_table with this backend");
    }

    auto table = empty_table(example, "clp");
    const int p = example.prompt_len();
    for (int t = 0; t < example.generation_len(); ++t) {
        const auto& full_dists = responses[0].distributions[p + t];
        for (int j = 0; j < p + t; ++j) {
            const auto& ablated_dists = responses[1 + j].distributions[p + t];
            if (ablated_dists.size() != full_dists.size())
                throw std::runtime_error("clp_table: position count changed under ablation");
            double score = 0.0;
            for (size_t pos = 0; pos < full_dists.size(); ++pos)
                score += kl_truncated(full_dists[pos], ablated_dists[pos]);
            if (options.average_positions && !full_dists.empty())
                score /= static_cast<double>(full_dists.size());
            table.values(t, j) = score;
        }
    }
    return table;
}

AttributionTable import_table(const std::string& path) { return io::load_table(path); }

}  // namespace cage
