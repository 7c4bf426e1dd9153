#pragma once

// Uniform scoring interface over autoregressive backends: teacher-forced
// per-unit log-probabilities plus optional truncated next-token
// distributions. Ships a deterministic mock backend with a known dependency
// structure and an HTTP client speaking the same request/response fields.

#include "cage/core.hpp"

#include <memory>

namespace cage {

/// Next-token distribution truncated to the top entries; everything outside
/// them is folded into tail_mass so the whole thing still sums to 1.
struct TruncatedDistribution {
    std::vector<std::pair<int, double>> entries;  // (token id, probability)
    double tail_mass = 0.0;
};

struct ScoreRequest {
    std::vector<std::string> units;  ///< full sequence: prompt units then generated units
    bool want_distributions = false;
    int top_k = 0;

    void validate() const;
};

/// unit_logprobs[i] is the total log-probability of unit i's tokens
/// conditioned on units 0..i-1 (0.0 for positions a backend does not score,
/// e.g. the mock's prompt units). distributions, when requested, holds one
/// list per unit with a truncated distribution per token position inside it.
struct ScoreResponse {
    std::vector<double> unit_logprobs;
    std::vector<std::vector<TruncatedDistribution>> distributions;

    void validate(const ScoreRequest& request) const;
};

struct TransportError : std::runtime_error {
    TransportError(const std::string& what, bool retryable)
        : std::runtime_error(what), retryable(retryable) {}
    bool retryable;
};

struct DistributionsUnavailableError : std::runtime_error {
    explicit DistributionsUnavailableError(const std::string& what) : std::runtime_error(what) {}
};

class ScoreBackend {
public:
    virtual ~ScoreBackend() = default;
    virtual ScoreResponse score_request(const ScoreRequest& request) = 0;
    /// Replacement text used when a unit is ablated.
    virtual std::string eos_text() const { return "</s>"; }
};

/// Ground-truth dependency structure for the mock backend. dependency(i, j)
/// is the exact log-probability drop of generated unit i when unit j is
/// replaced; templates hold the generated unit texts.
///
/// All weights must be multiples of 2^-20 with magnitude at most 2^10. On
/// that grid every partial sum the mock forms is exactly representable, so
/// ablation effects are additive bitwise, not just within tolerance.
struct MockModelSpec {
    Matrix dependency;  // generation_len x total_len, strictly causal, nonnegative
    std::vector<double> base_logprob;
    std::vector<std::string> templates;

    int generation_len() const { return dependency.rows(); }
    int total_len() const { return dependency.cols(); }
    int prompt_len() const { return total_len() - generation_len(); }

    /// Nearest grid point, for callers constructing specs from arbitrary reals.
    static double quantize(double v);
    static bool on_grid(double v);

    void validate() const;
};

/// Deterministic scoring oracle. A unit counts as perturbed when its text
/// differs from the reference sequence at that position; unit i's logprob is
/// base_logprob[i] plus the dependency weights of every unperturbed
/// preceding unit, so ablation effects are exactly additive.
class MockBackend : public ScoreBackend {
public:
    MockBackend(MockModelSpec spec, std::vector<std::string> reference_units);

    ScoreResponse score_request(const ScoreRequest& request) override;
    std::string eos_text() const override { return "</s>"; }

    const MockModelSpec& spec() const { return spec_; }
    const std::vector<std::string>& reference_units() const { return reference_; }

private:
    MockModelSpec spec_;
    std::vector<std::string> reference_;
};

/// HTTP client for remote backends: POST /score with the ScoreRequest fields
/// as a JSON body, response carries the ScoreResponse fields verbatim.
/// Connection-level failures are retried up to max_retries before a
/// retryable TransportError escapes.
class HttpBackend : public ScoreBackend {
public:
    explicit HttpBackend(std::string base_url, std::string auth_token = "",
                         int max_retries = 3, std::string eos = "</s>");
    ~HttpBackend() override;

    ScoreResponse score_request(const ScoreRequest& request) override;
    std::string eos_text() const override { return eos_; }

private:
    std::string base_url_;
    std::string auth_token_;
    int max_retries_;
    std::string eos_;
};

/// Validates the request, scores it, validates the response.
ScoreResponse score(ScoreBackend& backend, const ScoreRequest& request);

/// Scores requests with at most max_in_flight concurrent calls; results are
/// ordered by request index regardless of completion order.
std::vector<ScoreResponse> score_batch(ScoreBackend& backend,
                                       const std::vector<ScoreRequest>& requests,
                                       int max_in_flight = 4);

/// Builds an Example whose generated units come from the spec's templates,
/// so the true attribution table of the pair equals the spec's dependency
/// matrix. The output set defaults to all generated units.
Example mock_generate(const MockModelSpec& spec, const std::vector<std::string>& prompt_units);

}  // namespace cage
