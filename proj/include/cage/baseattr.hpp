#pragma once

// Perturbation-family base attribution methods computed through a scoring
// backend, plus import of externally produced tables (gradient or attention
// methods live out of process and arrive as files).

#include "cage/core.hpp"
#include "cage/modelclient.hpp"

namespace cage {

/// Occlusion scores: entry (t, j) is the log-probability drop of generated
/// unit t when unit j is replaced by the ablation unit. One scoring call per
/// perturbable unit plus one unperturbed call; each call covers every
/// generated unit. Drops may be negative and are stored as-is. An empty
/// ablation_unit uses the backend's EOS text.
AttributionTable perturbation_table(ScoreBackend& backend, const Example& example,
                                    const std::string& ablation_unit = "");

struct ClpOptions {
    std::string ablation_unit;       ///< empty: backend EOS text
    int top_k = 16;                  ///< distribution truncation
    bool average_positions = false;  ///< average instead of summing KL over a unit's positions
    int max_in_flight = 4;
};

/// Distribution-shift scores: entry (t, j) is the KL divergence (nats)
/// between the full-sequence and j-ablated next-token distributions, summed
/// over the token positions of generated unit t. Same perturbation scheme as
/// perturbation_table; requires a backend that can return distributions.
AttributionTable clp_table(ScoreBackend& backend, const Example& example,
                           const ClpOptions& options = {});

/// KL(p || q) in nats over truncated distributions, treating the tail bucket
/// as a single symbol. Probabilities on the q side are floored at 1e-12
/// before the log so truncation artifacts cannot produce infinities.
double kl_truncated(const TruncatedDistribution& p, const TruncatedDistribution& q);

/// Loads a table file, enforcing strict causality: a nonzero entry at or
/// beyond a row's own position is rejected with its position reported, never
/// silently zeroed.
AttributionTable import_table(const std::string& path);

}  // namespace cage
