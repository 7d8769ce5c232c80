#include "promptsweep/mock_providers.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "promptsweep/error.hpp"
#include "promptsweep/hashing.hpp"

namespace promptsweep {
namespace {

std::uint64_t mix_key(std::uint64_t seed, std::string_view domain, std::string_view item,
                      long a = 0, long b = 0) {
    std::uint64_t h = fnv1a64(domain);
    h = fnv1a64(item, h ^ splitmix64(seed));
    h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(a) + 0x51ed270b27ULL));
    return splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(b) + 0x2545f4914fULL));
}

ChatResponse mock_response(std::string text, const char* name) {
    ChatResponse r;
    r.raw_text = std::move(text);
    r.provider_meta = nlohmann::json{{"mock", name}};
    return r;
}

} // namespace

EchoProvider::EchoProvider(std::chrono::milliseconds delay) : delay_(delay) {}

ChatResponse EchoProvider::send(const ChatRequest& request) {
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    std::ostringstream ss;
    for (std::size_t i = 0; i < request.tag.items.size(); ++i) {
        if (i) ss << '\n';
        ss << (i + 1) << ": " << request.tag.items[i].gold;
    }
    return mock_response(ss.str(), "mock_echo");
}

ConfusionDistribution identity_matrix(std::size_t n) {
    ConfusionDistribution m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

ConfusionProvider::ConfusionProvider(std::vector<Label> labels, ConfusionDistribution matrix,
                                     std::uint64_t seed, double flip_prob)
    : labels_(std::move(labels)), matrix_(std::move(matrix)), seed_(seed), flip_prob_(flip_prob) {
    if (labels_.empty()) throw BadMatrix("confusion mock needs at least one label");
    if (matrix_.size() != labels_.size()) {
        throw BadMatrix("matrix has " + std::to_string(matrix_.size()) + " rows for " +
                        std::to_string(labels_.size()) + " labels");
    }
    for (std::size_t r = 0; r < matrix_.size(); ++r) {
        if (matrix_[r].size() != labels_.size()) {
            throw BadMatrix("matrix row " + std::to_string(r) + " has wrong width");
        }
        double sum = 0.0;
        for (double p : matrix_[r]) {
            if (!std::isfinite(p) || p < 0.0) {
                throw BadMatrix("matrix row " + std::to_string(r) + " has a negative entry");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw BadMatrix("matrix row " + std::to_string(r) + " sums to " +
                            std::to_string(sum));
        }
    }
    if (!(flip_prob_ >= 0.0 && flip_prob_ <= 1.0)) throw BadMatrix("flip_prob outside [0, 1]");
}

const Label& ConfusionProvider::predict(const ItemRef& item, int trial, int attempt) const {
    std::size_t gold = labels_.size();
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == item.gold) gold = i;
    }
    if (gold == labels_.size()) {
        throw ProviderRejected("confusion mock: unknown gold label '" + item.gold + "'");
    }

    const auto& row = matrix_[gold];
    const double u = unit_interval(mix_key(seed_, "base", item.item_id));
    std::size_t pred = row.size() - 1;
    while (pred > 0 && row[pred] == 0.0) --pred;  // last reachable label
    double cumulative = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        cumulative += row[i];
        if (row[i] > 0.0 && u < cumulative) {
            pred = i;
            break;
        }
    }

    if (flip_prob_ > 0.0 && labels_.size() > 1) {
        const double v = unit_interval(mix_key(seed_, "flip", item.item_id, trial, attempt));
        if (v < flip_prob_) {
            const auto w = mix_key(seed_, "flip-to", item.item_id, trial, attempt) %
                           (labels_.size() - 1);
            pred = w >= pred ? w + 1 : w;
        }
    }
    return labels_[pred];
}

ChatResponse ConfusionProvider::send(const ChatRequest& request) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < request.tag.items.size(); ++i) {
        if (i) ss << '\n';
        ss << (i + 1) << ": "
           << predict(request.tag.items[i], request.tag.trial, request.tag.attempt);
    }
    return mock_response(ss.str(), "mock_confusion");
}

FlakyProvider::FlakyProvider(std::shared_ptr<ChatProvider> inner, FlakyOptions options)
    : inner_(std::move(inner)), options_(options) {
    if (!inner_) throw std::invalid_argument("FlakyProvider needs an inner provider");
}

ChatResponse FlakyProvider::send(const ChatRequest& request) {
    const auto key = request.tag.key();
    int sends = 0;
    {
        std::lock_guard lock(mu_);
        sends = ++sends_[key];
    }
    if (sends <= options_.transient_failures) {
        throw TransportError("injected transport failure " + std::to_string(sends) + " for " + key);
    }
    const auto tag_hash = std::string(key);
    if (unit_interval(mix_key(options_.seed, "reject", tag_hash)) < options_.p_reject) {
        throw ProviderRejected("injected rejection for " + key);
    }
    if (unit_interval(mix_key(options_.seed, "malformed", tag_hash)) < options_.p_malformed) {
        std::ostringstream ss;
        ss << "Sure! Here are the labels for your texts:\n\n";
        for (std::size_t i = 0; i < request.tag.items.size(); ++i) {
            ss << (i + 1) << " - " << request.tag.items[i].gold << '\n';
        }
        return mock_response(ss.str(), "mock_flaky");
    }
    return inner_->send(request);
}

} // namespace promptsweep
