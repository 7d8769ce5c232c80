#pragma once
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptsweep/metrics.hpp"
#include "promptsweep/response_parser.hpp"
#include "promptsweep/task_model.hpp"

namespace promptsweep {

enum class CellStatus { complete, partial, failed };

std::string to_string(CellStatus s);
CellStatus parse_cell_status(std::string_view s);

struct CellTiming {
    std::int64_t wall_ms = 0;
    std::size_t requests = 0;     // provider calls, retries included
    std::size_t cache_hits = 0;
};

struct BatchError {
    std::size_t batch_index = 0;
    std::string error;

    bool operator==(const BatchError&) const = default;
};

// One row of a summary table. Timing is kept in memory only; the persisted
// form is a pure function of the inputs so reruns compare byte for byte.
struct CellResult {
    PromptConfig config;
    PredictionSet prediction_set;
    MetricsReport metrics;
    CellTiming timing;
    CellStatus status = CellStatus::failed;
    std::vector<BatchError> errors;
};

nlohmann::json config_to_json(const PromptConfig& c);
PromptConfig config_from_json(const nlohmann::json& j);

nlohmann::json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

nlohmann::json cell_to_json(const CellResult& cell);
CellResult cell_from_json(const nlohmann::json& j);

// Canonical text of a cell file.
std::string serialize_cell(const CellResult& cell);

} // namespace promptsweep
