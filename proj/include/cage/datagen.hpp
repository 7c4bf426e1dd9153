#pragma once

// Deterministic synthetic data: retrieval-style examples with known ground
// truth, paired with mock specs whose dependency structure makes every
// downstream number checkable in closed form.

#include "cage/core.hpp"
#include "cage/modelclient.hpp"

#include <cstdint>

namespace cage {

struct FactsParams {
    int n = 5;  ///< claims sampled into the prompt
    int m = 3;  ///< claims repeated by the generation
    int k = 2;  ///< trailing generations marked as the output

    // Mock dependency weights: each generation leans on its source claim and
    // tracks every prior generation at half that weight to avoid repeats.
    double source_weight = 2.0;
    double reuse_weight = 1.0;
    double base_logprob = -1.0;
};

struct FactsExample {
    Example example;
    MockModelSpec mock;
    std::vector<int> source_indices;  ///< prompt index of each generation's claim
};

/// Samples n claims from the pool without replacement, appends the
/// "List m of these facts." instruction, repeats m of the claims as the
/// generation (in prompt order) and marks the last k generations as the
/// output. gt_indices are the prompt positions of the output's claims. The
/// paired mock encodes source dependence plus reuse tracking of all prior
/// generations. Identical inputs produce byte-identical results on every
/// platform.
FactsExample generate_facts_example(const std::vector<std::string>& pool,
                                    const FactsParams& params, std::uint64_t seed);

FactsExample generate_facts_example(const std::vector<std::string>& pool, int n, int m, int k,
                                    std::uint64_t seed);

/// One claim per line; blank lines and exact duplicates are dropped.
std::vector<std::string> load_claim_pool(const std::string& path);

/// Examples from a JSON Lines file; malformed records fail with their line
/// number.
std::vector<Example> load_examples(const std::string& path);

}  // namespace cage
