#pragma once
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "promptsweep/provider_gateway.hpp"

namespace promptsweep {

// Answers every item with its gold label: "i: <gold>" per line.
class EchoProvider : public ChatProvider {
public:
    explicit EchoProvider(std::chrono::milliseconds delay = std::chrono::milliseconds{0});
    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "mock_echo"; }

private:
    std::chrono::milliseconds delay_;
};

using ConfusionDistribution = std::vector<std::vector<double>>;

// Samples each item's label from matrix[gold]. The base draw depends only on
// (seed, item_id), so repeated requests agree. With flip_prob > 0, each
// answer is additionally replaced by a uniformly chosen different label with
// probability flip_prob, keyed by (seed, item_id, trial, attempt).
class ConfusionProvider : public ChatProvider {
public:
    // Throws BadMatrix unless the matrix is |labels| x |labels| with
    // non-negative rows summing to 1 within 1e-9.
    ConfusionProvider(std::vector<Label> labels, ConfusionDistribution matrix, std::uint64_t seed,
                      double flip_prob = 0.0);
    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "mock_confusion"; }

    // The label this mock assigns to one item (exposed for tests).
    const Label& predict(const ItemRef& item, int trial, int attempt) const;

private:
    std::vector<Label> labels_;
    ConfusionDistribution matrix_;
    std::uint64_t seed_;
    double flip_prob_;
};

ConfusionDistribution identity_matrix(std::size_t n);

struct FlakyOptions {
    double p_malformed = 0.0;      // answer in "i - label" form, which the parser rejects
    double p_reject = 0.0;         // ProviderRejected (non-retryable)
    int transient_failures = 0;    // TransportError on the first N sends of each request
    std::uint64_t seed = 0;
};

// Wraps another provider and injects protocol and transport faults.
class FlakyProvider : public ChatProvider {
public:
    FlakyProvider(std::shared_ptr<ChatProvider> inner, FlakyOptions options);
    ChatResponse send(const ChatRequest& request) override;
    std::string name() const override { return "mock_flaky"; }

private:
    std::shared_ptr<ChatProvider> inner_;
    FlakyOptions options_;
    std::mutex mu_;
    std::map<std::string, int> sends_;
};

} // namespace promptsweep
