#include "cage/datagen.hpp"

#include "cage/io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>

namespace cage {

namespace {

// Rejection-sampled bound keeps results identical across standard libraries;
// std::uniform_int_distribution is implementation-defined.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Partial Fisher-Yates: first `count` slots of a shuffled index range.
std::vector<int> sample_without_replacement(std::mt19937_64& rng, int population, int count) {
    std::vector<int> indices(population);
    for (int i = 0; i < population; ++i) indices[i] = i;
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(bounded(rng, population - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(count);
    return indices;
}

}  // namespace

FactsExample generate_facts_example(const std::vector<std::string>& pool,
                                    const FactsParams& params, std::uint64_t seed) {
    if (params.k < 1 || params.k > params.m || params.m > params.n)
        throw std::invalid_argument("facts: need 1 <= k <= m <= n");
    if (static_cast<int>(pool.size()) < params.n)
        throw std::invalid_argument("facts: claim pool smaller than n");
    if (params.source_weight <= 0.0 || params.reuse_weight < 0.0)
        throw std::invalid_argument("facts: invalid dependency weights");

    std::mt19937_64 rng(seed);

    // Prompt: n sampled claims plus the trailing instruction unit.
    const auto claim_ids = sample_without_replacement(rng, static_cast<int>(pool.size()), params.n);
    std::vector<std::string> prompt_units;
    prompt_units.reserve(params.n + 1);
    for (int id : claim_ids) prompt_units.push_back(pool[id]);
    prompt_units.push_back("List " + std::to_string(params.m) + " of these facts.");
    const int p = params.n + 1;

    // Generation repeats m of the claims, in prompt order.
    auto sources = sample_without_replacement(rng, params.n, params.m);
    std::sort(sources.begin(), sources.end());

    MockModelSpec mock;
    mock.dependency = Matrix(params.m, p + params.m);
    mock.base_logprob.assign(params.m, params.base_logprob);
    for (int i = 0; i < params.m; ++i) {
        mock.templates.push_back(prompt_units[sources[i]]);
        mock.dependency(i, sources[i]) = params.source_weight;
        for (int j = 0; j < i; ++j) mock.dependency(i, p + j) = params.reuse_weight;
    }

    std::set<int> output;
    std::set<int> gt;
    for (int i = params.m - params.k; i < params.m; ++i) {
        output.insert(i);
        gt.insert(sources[i]);
    }

    FactsExample result;
    result.example = make_example(prompt_units, mock.templates, std::move(output), std::move(gt));
    result.mock = std::move(mock);
    result.source_indices = std::move(sources);
    return result;
}

FactsExample generate_facts_example(const std::vector<std::string>& pool, int n, int m, int k,
                                    std::uint64_t seed) {
    FactsParams params;
    params.n = n;
    params.m = m;
    params.k = k;
    return generate_facts_example(pool, params, seed);
}

std::vector<std::string> load_claim_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open claim pool: " + path);
    std::vector<std::string> pool;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        std::string claim = line.substr(start);
        if (std::find(pool.begin(), pool.end(), claim) == pool.end())
            pool.push_back(std::move(claim));
    }
    return pool;
}

std::vector<Example> load_examples(const std::string& path) {
    return io::load_examples_jsonl(path);
}

}  // namespace cage
