#pragma once
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptsweep {

using Label = std::string;

// A classification task: candidate labels plus the three optional context
// components (label descriptions, instructional nudges, few-shot pools).
struct TaskSpec {
    std::string task_id;
    std::vector<Label> labels;
    std::optional<std::map<Label, std::string>> descriptions;
    std::optional<std::string> nudges;
    std::optional<std::map<Label, std::vector<std::string>>> few_shot;
    std::string instruction_header;
    std::filesystem::path dataset_ref;

    // Canonical spelling of `raw` among `labels` under label normalization,
    // or nullopt when nothing matches.
    std::optional<Label> canonical_label(std::string_view raw) const;
    std::size_t label_index(const Label& label) const;
};

struct DatasetRecord {
    std::string item_id;
    std::string text;
    Label gold;

    bool operator==(const DatasetRecord&) const = default;
};

using Dataset = std::vector<DatasetRecord>;

// Presence flags in display order (label descriptions, instructional nudges,
// few-shot examples).
struct Flags {
    bool label_desc = false;
    bool nudges = false;
    bool few_shot = false;

    bool operator==(const Flags&) const = default;
};

// "(+,-,+)" style rendering and its inverse.
std::string to_notation(Flags flags);
Flags parse_notation(std::string_view notation);

// The eight triples in reporting order: by number of components present,
// then (label_desc, nudges, few_shot) read as a binary number.
const std::array<Flags, 8>& all_flag_triples();
int flag_rank(Flags flags);

enum class ProviderKind { openai_compat, gemini_compat, mock_echo, mock_confusion, mock_flaky };

std::string to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);
bool is_mock(ProviderKind kind);

struct ModelRef {
    ProviderKind provider = ProviderKind::mock_echo;
    std::string model_id;

    bool operator==(const ModelRef&) const = default;
};

// One cell of the experiment grid.
struct PromptConfig {
    Flags flags;
    std::size_t batch_size = 1;
    ProviderKind provider = ProviderKind::mock_echo;
    std::string model_id;
    double temperature = 0.0;
    int trial_index = 0;

    bool operator==(const PromptConfig&) const = default;

    std::string notation() const { return to_notation(flags); }
    // Stable identifier derived from every field; names cache and output files.
    std::string config_hash() const;
    std::string canonical_string() const;
};

// Strict weak order used for grid and report rows:
// (flags rank, batch_size, provider, model_id, trial_index, temperature).
bool grid_order_less(const PromptConfig& a, const PromptConfig& b);

struct Batch {
    std::size_t index = 0;
    std::vector<DatasetRecord> items;  // item i is numbered i + 1 in the prompt
};

// Errors: EmptyAxis when any axis is empty or a batch size is zero,
// InvariantViolation when repeats < 1.
std::vector<PromptConfig> generate_config_grid(const std::vector<Flags>& flags_axis,
                                               const std::vector<std::size_t>& batch_sizes,
                                               const std::vector<ModelRef>& models,
                                               int repeats,
                                               double temperature = 0.0);

std::vector<PromptConfig> generate_config_grid(const std::vector<std::size_t>& batch_sizes,
                                               const std::vector<ModelRef>& models,
                                               int repeats,
                                               double temperature = 0.0);

// Sequential partition in dataset order. With a shuffle seed, records are
// permuted deterministically before partitioning.
std::vector<Batch> partition_batches(const Dataset& dataset, std::size_t batch_size,
                                     std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Loads the JSON task spec and its dataset, then checks every invariant.
// Relative dataset paths resolve against the spec file's directory.
TaskSpec load_task_spec(const std::filesystem::path& path);
TaskSpec parse_task_spec(std::string_view json_text, const std::filesystem::path& base_dir);

Dataset load_dataset(const TaskSpec& spec);
Dataset parse_dataset_csv(std::string_view csv_text, const TaskSpec& spec);

// Throws InvariantViolation naming the first broken invariant.
void validate_task_spec(const TaskSpec& spec);
void validate_against_dataset(const TaskSpec& spec, const Dataset& dataset);

} // namespace promptsweep
