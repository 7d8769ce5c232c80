#pragma once
// Shared helpers for the unit tests: scratch directories and small
// synthetic tasks built in code.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "promptsweep/csv.hpp"
#include "promptsweep/task_model.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(FIXTURE_DIR) / rel; }

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag = "t") {
        static std::atomic<int> n{0};
        path_ = fs::temp_directory_path() /
                ("promptsweep_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Labels L0..L{n-1}, gold cycling through them so every label has support.
inline promptsweep::Dataset cyclic_dataset(std::size_t n_items, std::size_t n_labels,
                                           const std::string& prefix = "item") {
    promptsweep::Dataset ds;
    for (std::size_t i = 0; i < n_items; ++i) {
        ds.push_back({prefix + std::to_string(i), "text number " + std::to_string(i),
                      "L" + std::to_string(i % n_labels)});
    }
    return ds;
}

// Writes task.json + items.csv under `dir` with every optional component
// present, and returns the task path.
inline fs::path write_synthetic_task(const fs::path& dir, std::size_t n_items, std::size_t n_labels) {
    std::string labels, desc, shots;
    for (std::size_t l = 0; l < n_labels; ++l) {
        const auto name = "L" + std::to_string(l);
        labels += (l ? "," : "") + ("\"" + name + "\"");
        desc += (l ? "," : "") + ("\"" + name + "\": \"texts about topic " + name + "\"");
        shots += (l ? "," : "") + ("\"" + name + "\": [\"example for " + name + "\"]");
    }
    write_text(dir / "task.json",
               "{\"task_id\": \"synthetic\", \"instruction_header\": \"Classify each text.\","
               " \"dataset\": \"items.csv\", \"labels\": [" + labels + "],"
               " \"descriptions\": {" + desc + "},"
               " \"nudges\": \"- Be careful.\","
               " \"few_shot\": {" + shots + "}}");
    std::string csv_text = "item_id,text,gold\n";
    for (const auto& rec : cyclic_dataset(n_items, n_labels)) {
        csv_text += promptsweep::csv::format_row({rec.item_id, rec.text, rec.gold});
    }
    write_text(dir / "items.csv", csv_text);
    return dir / "task.json";
}

} // namespace testing_support
