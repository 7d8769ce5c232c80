#include "promptsweep/task_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "promptsweep/csv.hpp"
#include "promptsweep/error.hpp"
#include "promptsweep/fs_util.hpp"
#include "promptsweep/hashing.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {

using json = nlohmann::json;

std::optional<Label> TaskSpec::canonical_label(std::string_view raw) const {
    const std::string key = normalize_key(raw);
    for (const auto& label : labels) {
        if (normalize_key(label) == key) return label;
    }
    return std::nullopt;
}

std::size_t TaskSpec::label_index(const Label& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw InvariantViolation("unknown label '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

std::string to_notation(Flags flags) {
    std::string s = "(";
    s += flags.label_desc ? '+' : '-';
    s += ',';
    s += flags.nudges ? '+' : '-';
    s += ',';
    s += flags.few_shot ? '+' : '-';
    s += ')';
    return s;
}

Flags parse_notation(std::string_view notation) {
    // Accept spaces and the typographic minus (U+2212) people paste from tables.
    std::string compact;
    for (std::size_t i = 0; i < notation.size(); ++i) {
        if (notation.substr(i, 3) == "\xE2\x88\x92") {
            compact.push_back('-');
            i += 2;
        } else if (notation[i] != ' ') {
            compact.push_back(notation[i]);
        }
    }
    auto bad = [&] { return InvariantViolation("bad configuration notation '" + std::string(notation) + "'"); };
    auto sign = [&](char c) {
        if (c == '+') return true;
        if (c == '-') return false;
        throw bad();
    };
    if (compact.size() != 7 || compact[0] != '(' || compact[2] != ',' || compact[4] != ',' ||
        compact[6] != ')') {
        throw bad();
    }
    return Flags{sign(compact[1]), sign(compact[3]), sign(compact[5])};
}

const std::array<Flags, 8>& all_flag_triples() {
    static const std::array<Flags, 8> kTriples = {{
        {false, false, false},
        {false, false, true},
        {false, true, false},
        {true, false, false},
        {false, true, true},
        {true, false, true},
        {true, true, false},
        {true, true, true},
    }};
    return kTriples;
}

int flag_rank(Flags flags) {
    const auto& all = all_flag_triples();
    return static_cast<int>(std::find(all.begin(), all.end(), flags) - all.begin());
}

std::string to_string(ProviderKind kind) {
    switch (kind) {
    case ProviderKind::openai_compat: return "openai_compat";
    case ProviderKind::gemini_compat: return "gemini_compat";
    case ProviderKind::mock_echo: return "mock_echo";
    case ProviderKind::mock_confusion: return "mock_confusion";
    case ProviderKind::mock_flaky: return "mock_flaky";
    }
    return "unknown";
}

ProviderKind parse_provider_kind(std::string_view name) {
    for (auto k : {ProviderKind::openai_compat, ProviderKind::gemini_compat, ProviderKind::mock_echo,
                   ProviderKind::mock_confusion, ProviderKind::mock_flaky}) {
        if (to_string(k) == name) return k;
    }
    throw InvariantViolation("unknown provider '" + std::string(name) + "'");
}

bool is_mock(ProviderKind kind) {
    return kind == ProviderKind::mock_echo || kind == ProviderKind::mock_confusion ||
           kind == ProviderKind::mock_flaky;
}

std::string PromptConfig::canonical_string() const {
    std::ostringstream ss;
    ss << to_notation(flags) << '|' << batch_size << '|' << to_string(provider) << '|' << model_id
       << '|' << format_shortest(temperature) << '|' << trial_index;
    return ss.str();
}

std::string PromptConfig::config_hash() const {
    return sha256_hex(canonical_string()).substr(0, 16);
}

bool grid_order_less(const PromptConfig& a, const PromptConfig& b) {
    auto key = [](const PromptConfig& c) {
        return std::make_tuple(flag_rank(c.flags), c.batch_size, static_cast<int>(c.provider),
                               std::cref(c.model_id), c.trial_index, c.temperature);
    };
    return key(a) < key(b);
}

std::vector<PromptConfig> generate_config_grid(const std::vector<Flags>& flags_axis,
                                               const std::vector<std::size_t>& batch_sizes,
                                               const std::vector<ModelRef>& models,
                                               int repeats,
                                               double temperature) {
    if (flags_axis.empty()) throw EmptyAxis("flags axis is empty");
    if (batch_sizes.empty()) throw EmptyAxis("batch size axis is empty");
    if (models.empty()) throw EmptyAxis("model axis is empty");
    if (std::find(batch_sizes.begin(), batch_sizes.end(), 0u) != batch_sizes.end()) {
        throw EmptyAxis("batch sizes must be >= 1");
    }
    if (repeats < 1) throw InvariantViolation("repeats must be >= 1");

    std::vector<PromptConfig> grid;
    grid.reserve(flags_axis.size() * batch_sizes.size() * models.size() *
                 static_cast<std::size_t>(repeats));
    for (const auto& flags : flags_axis) {
        for (auto b : batch_sizes) {
            for (const auto& model : models) {
                for (int t = 0; t < repeats; ++t) {
                    grid.push_back(PromptConfig{flags, b, model.provider, model.model_id,
                                                temperature, t});
                }
            }
        }
    }
    std::sort(grid.begin(), grid.end(), grid_order_less);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] == grid[i - 1]) {
            throw InvariantViolation("duplicate grid cell " + grid[i].canonical_string());
        }
    }
    return grid;
}

std::vector<PromptConfig> generate_config_grid(const std::vector<std::size_t>& batch_sizes,
                                               const std::vector<ModelRef>& models,
                                               int repeats,
                                               double temperature) {
    const auto& all = all_flag_triples();
    return generate_config_grid(std::vector<Flags>(all.begin(), all.end()), batch_sizes, models,
                                repeats, temperature);
}

std::vector<Batch> partition_batches(const Dataset& dataset, std::size_t batch_size,
                                     std::optional<std::uint64_t> shuffle_seed) {
    if (batch_size == 0) throw InvariantViolation("batch size must be >= 1");

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (shuffle_seed) {
        // Fisher-Yates over a splitmix64 stream; identical on every platform.
        std::uint64_t state = *shuffle_seed;
        for (std::size_t i = order.size(); i > 1; --i) {
            state = splitmix64(state);
            auto j = static_cast<std::size_t>(state % i);
            std::swap(order[i - 1], order[j]);
        }
    }

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        Batch batch;
        batch.index = batches.size();
        for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
            batch.items.push_back(dataset[order[i]]);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

namespace {

std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw MalformedSpec(std::string("task spec: '") + key + "' must be a string");
    }
    return j[key].get<std::string>();
}

} // namespace

TaskSpec parse_task_spec(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw MalformedSpec(std::string("task spec: ") + e.what());
    }
    if (!j.is_object()) throw MalformedSpec("task spec: top level must be an object");

    TaskSpec spec;
    try {
        spec.task_id = require_string(j, "task_id");
        spec.instruction_header = require_string(j, "instruction_header");
        std::filesystem::path dataset = require_string(j, "dataset");
        spec.dataset_ref = dataset.is_absolute() ? dataset : base_dir / dataset;

        if (!j.contains("labels") || !j["labels"].is_array()) {
            throw MalformedSpec("task spec: 'labels' must be an array");
        }
        spec.labels = j["labels"].get<std::vector<Label>>();

        if (j.contains("descriptions") && !j["descriptions"].is_null()) {
            spec.descriptions = j["descriptions"].get<std::map<Label, std::string>>();
        }
        if (j.contains("nudges") && !j["nudges"].is_null()) {
            spec.nudges = j["nudges"].get<std::string>();
        }
        if (j.contains("few_shot") && !j["few_shot"].is_null()) {
            spec.few_shot = j["few_shot"].get<std::map<Label, std::vector<std::string>>>();
        }
    } catch (const json::type_error& e) {
        throw MalformedSpec(std::string("task spec: ") + e.what());
    }
    validate_task_spec(spec);
    return spec;
}

void validate_task_spec(const TaskSpec& spec) {
    if (spec.labels.empty()) throw InvariantViolation("task spec has no labels");
    std::set<std::string> seen;
    for (const auto& label : spec.labels) {
        auto key = normalize_key(label);
        if (key.empty()) throw InvariantViolation("empty label");
        if (!seen.insert(key).second) {
            throw InvariantViolation("labels not unique after normalization: '" + label + "'");
        }
    }
    auto is_label = [&](const Label& l) {
        return std::find(spec.labels.begin(), spec.labels.end(), l) != spec.labels.end();
    };
    if (spec.descriptions) {
        for (const auto& [label, text] : *spec.descriptions) {
            if (!is_label(label)) {
                throw InvariantViolation("description for unknown label '" + label + "'");
            }
        }
        for (const auto& label : spec.labels) {
            auto it = spec.descriptions->find(label);
            if (it == spec.descriptions->end() || trim(it->second).empty()) {
                throw InvariantViolation("missing description for label '" + label + "'");
            }
        }
    }
    if (spec.few_shot) {
        for (const auto& [label, examples] : *spec.few_shot) {
            if (!is_label(label)) {
                throw InvariantViolation("few-shot examples for unknown label '" + label + "'");
            }
        }
    }
}

Dataset parse_dataset_csv(std::string_view csv_text, const TaskSpec& spec) {
    std::vector<csv::Row> rows;
    try {
        rows = csv::parse(csv_text);
    } catch (const std::invalid_argument& e) {
        throw MalformedSpec(std::string("dataset: ") + e.what());
    }
    if (rows.empty() || rows[0] != csv::Row{"item_id", "text", "gold"}) {
        throw MalformedSpec("dataset: header must be item_id,text,gold");
    }
    Dataset dataset;
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        if (row.size() != 3) {
            throw MalformedSpec("dataset: record " + std::to_string(r) + " has " +
                                std::to_string(row.size()) + " fields");
        }
        auto gold = spec.canonical_label(row[2]);
        if (!gold) {
            throw InvariantViolation("dataset: item '" + row[0] + "' has unknown gold label '" +
                                     row[2] + "'");
        }
        if (!ids.insert(row[0]).second) {
            throw InvariantViolation("dataset: duplicate item_id '" + row[0] + "'");
        }
        dataset.push_back(DatasetRecord{row[0], row[1], *gold});
    }
    validate_against_dataset(spec, dataset);
    return dataset;
}

void validate_against_dataset(const TaskSpec& spec, const Dataset& dataset) {
    if (!spec.few_shot) return;
    std::unordered_map<std::string, const DatasetRecord*> texts;
    for (const auto& rec : dataset) texts.emplace(normalize_key(rec.text), &rec);
    for (const auto& [label, examples] : *spec.few_shot) {
        for (const auto& example : examples) {
            auto it = texts.find(normalize_key(example));
            if (it != texts.end()) {
                throw InvariantViolation("few-shot example for '" + label +
                                         "' overlaps evaluation item '" + it->second->item_id + "'");
            }
        }
    }
}

Dataset load_dataset(const TaskSpec& spec) {
    if (!std::filesystem::is_regular_file(spec.dataset_ref)) {
        throw MissingDataset("dataset not found: " + spec.dataset_ref.string());
    }
    return parse_dataset_csv(read_file(spec.dataset_ref), spec);
}

TaskSpec load_task_spec(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) {
        throw MalformedSpec("task spec not found: " + path.string());
    }
    auto spec = parse_task_spec(read_file(path), path.parent_path());
    load_dataset(spec);  // existence, gold labels and few-shot overlap
    return spec;
}

} // namespace promptsweep
