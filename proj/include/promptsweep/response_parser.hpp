#pragma once
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promptsweep/task_model.hpp"

namespace promptsweep {

struct RawPrediction {
    long index = 0;
    std::string raw_label;
    std::size_t line_no = 0;  // 1-based

    bool operator==(const RawPrediction&) const = default;
};

struct ParsedResponse {
    std::vector<RawPrediction> predictions;  // document order
    std::size_t skipped_lines = 0;
};

// A line matches `<digits>:<spaces><label>`; leading whitespace is allowed.
// Everything else is skipped and counted. Throws NoParsableLines when no
// line matches, and InvariantViolation when k == 0.
ParsedResponse parse_batch_response(std::string_view raw, std::size_t k);

// Exact match against the candidate labels after normalize_key on both
// sides. No fuzzy matching.
std::optional<Label> normalize_label(std::string_view raw, const std::vector<Label>& labels);

// Precomputed normalization table for repeated lookups.
class LabelMatcher {
public:
    explicit LabelMatcher(const std::vector<Label>& labels);
    std::optional<Label> match(std::string_view raw) const;

private:
    std::unordered_map<std::string, Label> by_key_;
};

enum class Provenance { parsed, repaired, defaulted };

std::string to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct PredictionEntry {
    std::string item_id;
    Label gold;
    std::optional<Label> predicted;  // nullopt is INVALID
    Provenance provenance = Provenance::parsed;

    bool operator==(const PredictionEntry&) const = default;
};

struct PredictionSet {
    std::vector<PredictionEntry> entries;
    PromptConfig config;

    bool operator==(const PredictionSet&) const = default;
};

struct Alignment {
    std::vector<PredictionEntry> entries;  // exactly one per batch item, batch order
    std::vector<long> duplicate_indices;
    std::vector<long> out_of_range_indices;
    std::size_t missing = 0;         // indices with no line at all
    std::size_t invalid_labels = 0;  // lines whose label did not normalize
};

// First line wins for each index; missing indices become INVALID with
// provenance `defaulted`. `matched_as` is the provenance recorded for items
// that did get a line (parsed, or repaired after a corrective retry).
Alignment align_predictions(const std::vector<RawPrediction>& raws, const Batch& batch,
                            const LabelMatcher& labels,
                            Provenance matched_as = Provenance::parsed);

// All-defaulted alignment, used when no line of a response could be read.
Alignment default_alignment(const Batch& batch);

} // namespace promptsweep
