#include "promptsweep/cell_result.hpp"

#include "promptsweep/error.hpp"

namespace promptsweep {

using json = nlohmann::json;

std::string to_string(CellStatus s) {
    switch (s) {
    case CellStatus::complete: return "complete";
    case CellStatus::partial: return "partial";
    case CellStatus::failed: return "failed";
    }
    return "unknown";
}

CellStatus parse_cell_status(std::string_view s) {
    if (s == "complete") return CellStatus::complete;
    if (s == "partial") return CellStatus::partial;
    if (s == "failed") return CellStatus::failed;
    throw InvariantViolation("unknown cell status '" + std::string(s) + "'");
}

json config_to_json(const PromptConfig& c) {
    return json{{"flags", to_notation(c.flags)},
                {"batch_size", c.batch_size},
                {"provider", to_string(c.provider)},
                {"model_id", c.model_id},
                {"temperature", c.temperature},
                {"trial_index", c.trial_index}};
}

PromptConfig config_from_json(const json& j) {
    PromptConfig c;
    c.flags = parse_notation(j.at("flags").get<std::string>());
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.provider = parse_provider_kind(j.at("provider").get<std::string>());
    c.model_id = j.at("model_id").get<std::string>();
    c.temperature = j.at("temperature").get<double>();
    c.trial_index = j.at("trial_index").get<int>();
    return c;
}

json metrics_to_json(const MetricsReport& m) {
    json per_class = json::array();
    for (const auto& row : m.per_class) {
        per_class.push_back(json{{"label", row.label},
                                 {"precision", row.precision},
                                 {"recall", row.recall},
                                 {"f1", row.f1},
                                 {"support", row.support}});
    }
    return json{{"accuracy", m.accuracy},   {"macro_f1", m.macro_f1},
                {"weighted_f1", m.weighted_f1}, {"n_items", m.n_items},
                {"n_invalid", m.n_invalid}, {"per_class", per_class}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.accuracy = j.at("accuracy").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.weighted_f1 = j.at("weighted_f1").get<double>();
    m.n_items = j.at("n_items").get<std::size_t>();
    m.n_invalid = j.at("n_invalid").get<std::size_t>();
    for (const auto& row : j.at("per_class")) {
        m.per_class.push_back(ClassMetrics{row.at("label").get<std::string>(),
                                           row.at("precision").get<double>(),
                                           row.at("recall").get<double>(),
                                           row.at("f1").get<double>(),
                                           row.at("support").get<std::size_t>()});
    }
    return m;
}

json cell_to_json(const CellResult& cell) {
    json entries = json::array();
    for (const auto& e : cell.prediction_set.entries) {
        entries.push_back(json{{"item_id", e.item_id},
                               {"gold", e.gold},
                               {"predicted", e.predicted ? json(*e.predicted) : json(nullptr)},
                               {"provenance", to_string(e.provenance)}});
    }
    json errors = json::array();
    for (const auto& e : cell.errors) {
        errors.push_back(json{{"batch_index", e.batch_index}, {"error", e.error}});
    }
    return json{{"config", config_to_json(cell.config)},
                {"config_hash", cell.config.config_hash()},
                {"status", to_string(cell.status)},
                {"metrics", metrics_to_json(cell.metrics)},
                {"errors", errors},
                {"entries", entries}};
}

CellResult cell_from_json(const json& j) {
    CellResult cell;
    cell.config = config_from_json(j.at("config"));
    cell.status = parse_cell_status(j.at("status").get<std::string>());
    cell.metrics = metrics_from_json(j.at("metrics"));
    for (const auto& e : j.at("errors")) {
        cell.errors.push_back(BatchError{e.at("batch_index").get<std::size_t>(),
                                         e.at("error").get<std::string>()});
    }
    cell.prediction_set.config = cell.config;
    for (const auto& e : j.at("entries")) {
        PredictionEntry entry;
        entry.item_id = e.at("item_id").get<std::string>();
        entry.gold = e.at("gold").get<std::string>();
        if (!e.at("predicted").is_null()) entry.predicted = e.at("predicted").get<std::string>();
        entry.provenance = parse_provenance(e.at("provenance").get<std::string>());
        cell.prediction_set.entries.push_back(std::move(entry));
    }
    return cell;
}

std::string serialize_cell(const CellResult& cell) {
    return cell_to_json(cell).dump(2) + "\n";
}

} // namespace promptsweep
