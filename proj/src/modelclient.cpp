#include "cage/modelclient.hpp"

#include "cage/io.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cage {

void ScoreRequest::validate() const {
    if (units.empty()) throw std::invalid_argument("score request: empty unit list");
    if (want_distributions && top_k < 1)
        throw std::invalid_argument("score request: top_k must be >= 1 when distributions are requested");
}

void ScoreResponse::validate(const ScoreRequest& request) const {
    if (unit_logprobs.size() != request.units.size())
        throw std::runtime_error("score response: logprob count does not match unit count");
    for (double lp : unit_logprobs) {
        if (!std::isfinite(lp)) throw std::runtime_error("score response: non-finite logprob");
    }
    if (request.want_distributions) {
        if (distributions.size() != request.units.size())
            throw DistributionsUnavailableError("distributions unavailable");
        for (const auto& unit_dists : distributions) {
            for (const auto& dist : unit_dists) {
                double total = dist.tail_mass;
                for (const auto& [id, p] : dist.entries) {
                    (void)id;
                    if (!(p >= 0.0)) throw std::runtime_error("score response: negative probability");
                    total += p;
                }
                if (std::abs(total - 1.0) > 1e-6)
                    throw std::runtime_error("score response: distribution does not sum to 1");
            }
        }
    }
}

namespace {
constexpr double kGridStep = 1.0 / (1 << 20);
constexpr double kGridLimit = 1024.0;
}  // namespace

double MockModelSpec::quantize(double v) {
    return std::nearbyint(v / kGridStep) * kGridStep;
}

bool MockModelSpec::on_grid(double v) {
    return std::isfinite(v) && std::abs(v) <= kGridLimit && v == quantize(v);
}

void MockModelSpec::validate() const {
    if (dependency.rows() < 1 || dependency.cols() <= dependency.rows())
        throw std::invalid_argument("mock spec: dependency must be Y x (P+Y) with P >= 1");
    for (int i = 0; i < dependency.rows(); ++i) {
        for (int j = 0; j < dependency.cols(); ++j) {
            const double v = dependency(i, j);
            if (v < 0.0 || !on_grid(v))
                throw std::invalid_argument(
                    "mock spec: dependency entries must be nonnegative multiples of 2^-20 "
                    "no larger than 1024 (see MockModelSpec::quantize)");
            if (j >= prompt_len() + i && v != 0.0)
                throw std::invalid_argument("mock spec: dependency must be strictly causal");
        }
    }
    if (base_logprob.size() != static_cast<size_t>(generation_len()))
        throw std::invalid_argument("mock spec: base_logprob length mismatch");
    for (double b : base_logprob) {
        if (!on_grid(b))
            throw std::invalid_argument("mock spec: base_logprob must be multiples of 2^-20 "
                                        "no larger than 1024 in magnitude");
    }
    if (!templates.empty() && templates.size() != static_cast<size_t>(generation_len()))
        throw std::invalid_argument("mock spec: template count mismatch");
}

MockBackend::MockBackend(MockModelSpec spec, std::vector<std::string> reference_units)
    : spec_(std::move(spec)), reference_(std::move(reference_units)) {
    spec_.validate();
    if (reference_.size() != static_cast<size_t>(spec_.total_len()))
        throw std::invalid_argument("mock backend: reference sequence length mismatch");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Two-symbol vocabulary {0, 1} with P(0) = sigmoid(m), truncated to top_k.
TruncatedDistribution mock_distribution(double m, int top_k) {
    const double p0 = sigmoid(m);
    std::vector<std::pair<int, double>> pairs = {{0, p0}, {1, 1.0 - p0}};
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    TruncatedDistribution dist;
    for (int k = 0; k < top_k && k < static_cast<int>(pairs.size()); ++k)
        dist.entries.push_back(pairs[k]);
    double kept = 0.0;
    for (const auto& [id, p] : dist.entries) {
        (void)id;
        kept += p;
    }
    dist.tail_mass = std::max(0.0, 1.0 - kept);
    return dist;
}

}  // namespace

ScoreResponse MockBackend::score_request(const ScoreRequest& request) {
    request.validate();
    if (request.units.size() != reference_.size())
        throw std::invalid_argument("mock backend: request length does not match reference sequence");

    const int p = spec_.prompt_len();
    const int t = spec_.total_len();

    std::vector<bool> matches(t);
    for (int j = 0; j < t; ++j) matches[j] = request.units[j] == reference_[j];

    ScoreResponse resp;
    resp.unit_logprobs.assign(t, 0.0);
    for (int i = 0; i < spec_.generation_len(); ++i) {
        double lp = spec_.base_logprob[i];
        for (int j = 0; j < p + i; ++j) {
            if (matches[j]) lp += spec_.dependency(i, j);
        }
        resp.unit_logprobs[p + i] = lp;
    }
    if (request.want_distributions) {
        resp.distributions.resize(t);
        for (int pos = 0; pos < t; ++pos) {
            const double m = pos < p ? 0.0 : resp.unit_logprobs[pos];
            resp.distributions[pos].push_back(mock_distribution(m, request.top_k));
        }
    }
    return resp;
}

HttpBackend::HttpBackend(std::string base_url, std::string auth_token, int max_retries,
                         std::string eos)
    : base_url_(std::move(base_url)),
      auth_token_(std::move(auth_token)),
      max_retries_(max_retries),
      eos_(std::move(eos)) {}

HttpBackend::~HttpBackend() = default;

ScoreResponse HttpBackend::score_request(const ScoreRequest& request) {
    request.validate();
    const std::string body = io::to_json(request).dump();

    httplib::Client client(base_url_);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);

    httplib::Result result;
    for (int attempt = 0; attempt < std::max(1, max_retries_); ++attempt) {
        result = client.Post("/score", headers, body, "application/json");
        if (result) break;
    }
    if (!result)
        throw TransportError("backend unreachable: " + base_url_ + " (" +
                                 httplib::to_string(result.error()) + ")",
                             /*retryable=*/true);
    if (result->status != 200) {
        if (result->status == 501 || result->body.find("distributions unavailable") != std::string::npos)
            throw DistributionsUnavailableError("distributions unavailable");
        throw TransportError("backend returned status " + std::to_string(result->status),
                             /*retryable=*/result->status >= 500);
    }

    ScoreResponse resp = io::score_response_from_json(nlohmann::json::parse(result->body));
    resp.validate(request);
    return resp;
}

ScoreResponse score(ScoreBackend& backend, const ScoreRequest& request) {
    request.validate();
    ScoreResponse resp = backend.score_request(request);
    resp.validate(request);
    return resp;
}

std::vector<ScoreResponse> score_batch(ScoreBackend& backend,
                                       const std::vector<ScoreRequest>& requests,
                                       int max_in_flight) {
    if (max_in_flight < 1) throw std::invalid_argument("score_batch: max_in_flight must be >= 1");
    std::vector<ScoreResponse> responses(requests.size());
    if (requests.empty()) return responses;

    const int workers = std::min<int>(max_in_flight, static_cast<int>(requests.size()));
    if (workers == 1) {
        for (size_t i = 0; i < requests.size(); ++i) responses[i] = score(backend, requests[i]);
        return responses;
    }

    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1))
                    responses[i] = score(backend, requests[i]);
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(requests.size());  // drain remaining work
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return responses;
}

Example mock_generate(const MockModelSpec& spec, const std::vector<std::string>& prompt_units) {
    spec.validate();
    if (static_cast<int>(prompt_units.size()) != spec.prompt_len())
        throw std::invalid_argument("mock_generate: prompt length does not match spec");

    std::vector<std::string> generated;
    generated.reserve(spec.generation_len());
    for (int i = 0; i < spec.generation_len(); ++i) {
        if (!spec.templates.empty())
            generated.push_back(spec.templates[i]);
        else
            generated.push_back("generated unit " + std::to_string(i + 1));
    }
    std::set<int> output;
    for (int i = 0; i < spec.generation_len(); ++i) output.insert(i);
    return make_example(prompt_units, std::move(generated), std::move(output));
}

}  // namespace cage
