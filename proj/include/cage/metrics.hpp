#pragma once

// Quantitative evaluation: coverage of ground-truth prompt units and
// deletion-based faithfulness curves.

#include "cage/core.hpp"
#include "cage/modelclient.hpp"

namespace cage {

/// Fraction of ground-truth prompt units whose share of the total
/// attribution lies within [0.5, 1.5] times the uniform share 1/|gt|.
/// gt holds 0-based prompt indices. An all-zero attribution scores 0.
double attribution_coverage(const ContextAttribution& attribution, const std::set<int>& gt);

/// Output probability versus fraction of prompt units cumulatively ablated
/// in descending attribution order. probabilities are anchored so the curve
/// starts at exactly 1 and clamped to [0, 1] for the AUC;
/// raw_probabilities keeps the unclamped values (ablation can raise
/// likelihood). ablation_order lists prompt indices in deletion order.
struct DeletionCurve {
    std::vector<double> fractions;
    std::vector<double> probabilities;
    std::vector<double> raw_probabilities;
    std::vector<int> ablation_order;
    double auc = 0.0;
    std::string method_tag;
    NormalizationMode mode = NormalizationMode::RowStochastic;
};

/// Step k replaces the k highest-attributed prompt units (ties broken by
/// ascending index) with the ablation unit and scores the sequence once;
/// the reported score is the output set's total log-probability. An empty
/// ablation_unit uses the backend's EOS text.
DeletionCurve deletion_curve(ScoreBackend& backend, const Example& example,
                             const ContextAttribution& attribution,
                             const std::string& ablation_unit = "");

struct SummaryRow {
    std::string method;
    std::string mode;
    std::string metric;
    double mean = 0.0;
    double stdev = 0.0;  // population standard deviation
    int n = 0;
};

/// Deletion-AUC mean and population standard deviation per (method, mode)
/// group found in the attributions, in first-appearance order. examples and
/// attributions are aligned; an example may appear several times with
/// different attributions.
std::vector<SummaryRow> faithfulness_suite(ScoreBackend& backend,
                                           const std::vector<Example>& examples,
                                           const std::vector<ContextAttribution>& attributions,
                                           const std::string& ablation_unit = "");

/// Mean/population-stdev helper shared by the summary builders.
std::pair<double, double> mean_and_stdev(const std::vector<double>& values);

}  // namespace cage
