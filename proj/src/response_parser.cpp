#include "promptsweep/response_parser.hpp"

#include "promptsweep/error.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {
namespace {

constexpr std::size_t kMaxIndexDigits = 9;

std::optional<RawPrediction> match_line(std::string_view line, std::size_t line_no) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t digits_start = i;
    long index = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
        if (i - digits_start >= kMaxIndexDigits) return std::nullopt;
        index = index * 10 + (line[i] - '0');
        ++i;
    }
    if (i == digits_start || i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    auto label = trim(line.substr(i));
    if (label.empty()) return std::nullopt;
    return RawPrediction{index, std::string(label), line_no};
}

} // namespace

ParsedResponse parse_batch_response(std::string_view raw, std::size_t k) {
    if (k == 0) throw InvariantViolation("parse_batch_response: k must be >= 1");
    ParsedResponse out;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(raw)) {
        ++line_no;
        if (auto m = match_line(line, line_no)) {
            out.predictions.push_back(std::move(*m));
        } else {
            ++out.skipped_lines;
        }
    }
    if (out.predictions.empty()) {
        throw NoParsableLines("no `number: label` lines in response (" +
                              std::to_string(out.skipped_lines) + " lines skipped)");
    }
    return out;
}

std::optional<Label> normalize_label(std::string_view raw, const std::vector<Label>& labels) {
    const auto key = normalize_key(raw);
    for (const auto& label : labels) {
        if (normalize_key(label) == key) return label;
    }
    return std::nullopt;
}

LabelMatcher::LabelMatcher(const std::vector<Label>& labels) {
    for (const auto& label : labels) by_key_.emplace(normalize_key(label), label);
}

std::optional<Label> LabelMatcher::match(std::string_view raw) const {
    auto it = by_key_.find(normalize_key(raw));
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::parsed: return "parsed";
    case Provenance::repaired: return "repaired";
    case Provenance::defaulted: return "defaulted";
    }
    return "unknown";
}

Provenance parse_provenance(std::string_view s) {
    if (s == "parsed") return Provenance::parsed;
    if (s == "repaired") return Provenance::repaired;
    if (s == "defaulted") return Provenance::defaulted;
    throw InvariantViolation("unknown provenance '" + std::string(s) + "'");
}

Alignment align_predictions(const std::vector<RawPrediction>& raws, const Batch& batch,
                            const LabelMatcher& labels, Provenance matched_as) {
    const std::size_t k = batch.items.size();
    std::vector<const RawPrediction*> first(k, nullptr);
    Alignment out;
    for (const auto& raw : raws) {
        if (raw.index < 1 || static_cast<std::size_t>(raw.index) > k) {
            out.out_of_range_indices.push_back(raw.index);
            continue;
        }
        auto& slot = first[static_cast<std::size_t>(raw.index) - 1];
        if (slot) {
            out.duplicate_indices.push_back(raw.index);
        } else {
            slot = &raw;
        }
    }
    out.entries.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& item = batch.items[i];
        PredictionEntry entry{item.item_id, item.gold, std::nullopt, Provenance::defaulted};
        if (first[i]) {
            entry.predicted = labels.match(first[i]->raw_label);
            entry.provenance = matched_as;
            if (!entry.predicted) ++out.invalid_labels;
        } else {
            ++out.missing;
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

Alignment default_alignment(const Batch& batch) {
    return align_predictions({}, batch, LabelMatcher({}));
}

} // namespace promptsweep
