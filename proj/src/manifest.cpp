#include "promptsweep/manifest.hpp"

#include <algorithm>

#include "promptsweep/error.hpp"
#include "promptsweep/fs_util.hpp"

namespace promptsweep {

using json = nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::vector<Flags> parse_flag_list(const json& j) {
    std::vector<Flags> out;
    for (const auto& n : j) out.push_back(parse_notation(n.get<std::string>()));
    return out;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ManifestInvalid(std::string(what) + " outside [0, 1]");
}

} // namespace

RunManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    }
    if (!j.is_object()) throw ManifestInvalid("manifest: top level must be an object");

    RunManifest m;
    m.source = j;
    try {
        m.task_path = resolve(base_dir, j.at("task").get<std::string>());
        m.task = load_task_spec(m.task_path);

        for (const auto& model : j.at("models")) {
            m.models.push_back(ModelRef{parse_provider_kind(model.at("provider").get<std::string>()),
                                        model.at("model_id").get<std::string>()});
        }
        m.repeats = j.value("repeats", 1);
        m.seed = j.value("seed", std::uint64_t{0});
        m.cache_dir = resolve(base_dir, j.value("cache_dir", std::string("cache")));
        m.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
        m.use_cache = j.value("cache", true);
        m.shuffle = j.value("shuffle", false);
        m.workers = j.value("workers", std::size_t{4});
        m.repair_retries = j.value("repair_retries", 1);
        m.requests_per_minute = j.value("requests_per_minute", std::size_t{0});
        m.timeout = std::chrono::seconds(j.value("timeout_s", 120));
        m.max_attempts = j.value("max_attempts", 5);
        m.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", 1000));
        const double temperature = j.value("temperature", 0.0);

        std::vector<Flags> flags;
        if (j.contains("flags")) {
            flags = parse_flag_list(j["flags"]);
        } else {
            flags.assign(all_flag_triples().begin(), all_flag_triples().end());
        }
        const auto batch_sizes = j.at("batch_sizes").get<std::vector<std::size_t>>();
        m.configs = generate_config_grid(flags, batch_sizes, m.models, m.repeats, temperature);

        if (j.contains("mock")) {
            const auto& mj = j["mock"];
            m.mock.inner = mj.value("inner", std::string("mock_echo"));
            if (mj.contains("matrix")) m.mock.matrix = mj["matrix"].get<ConfusionDistribution>();
            m.mock.flip_prob = mj.value("flip_prob", 0.0);
            m.mock.p_malformed = mj.value("p_malformed", 0.0);
            m.mock.p_reject = mj.value("p_reject", 0.0);
            m.mock.transient_failures = mj.value("transient_failures", 0);
            m.mock.delay = std::chrono::milliseconds(mj.value("delay_ms", 0));
        }

        if (j.contains("audit")) {
            const auto& aj = j["audit"];
            m.audit.enabled = aj.value("enabled", true);
            m.audit.repeats = aj.value("repeats", 3);
            if (aj.contains("flags")) m.audit.flags = parse_flag_list(aj["flags"]);
            if (aj.contains("batch_sizes")) {
                m.audit.batch_sizes = aj["batch_sizes"].get<std::vector<std::size_t>>();
            }
        }
        if (m.audit.flags.empty()) m.audit.flags = {Flags{}, Flags{true, true, true}};
        if (m.audit.batch_sizes.empty()) {
            m.audit.batch_sizes = {1};
            auto largest = *std::max_element(batch_sizes.begin(), batch_sizes.end());
            if (largest != 1) m.audit.batch_sizes.push_back(largest);
        }
    } catch (const json::exception& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    } catch (const EmptyAxis& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    } catch (const InvariantViolation& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    } catch (const MalformedSpec& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    } catch (const MissingDataset& e) {
        throw ManifestInvalid(std::string("manifest: ") + e.what());
    }

    if (m.workers == 0) throw ManifestInvalid("manifest: workers must be >= 1");
    if (m.repair_retries < 0) throw ManifestInvalid("manifest: repair_retries must be >= 0");
    if (m.max_attempts < 1) throw ManifestInvalid("manifest: max_attempts must be >= 1");
    if (m.audit.repeats < 2) throw ManifestInvalid("manifest: audit repeats must be >= 2");
    check_probability(m.mock.flip_prob, "mock.flip_prob");
    check_probability(m.mock.p_malformed, "mock.p_malformed");
    check_probability(m.mock.p_reject, "mock.p_reject");
    if (m.mock.inner != "mock_echo" && m.mock.inner != "mock_confusion") {
        throw ManifestInvalid("manifest: mock.inner must be mock_echo or mock_confusion");
    }

    for (const auto& cfg : m.configs) {
        if (cfg.temperature < 0.0 || cfg.temperature > 2.0) {
            throw ManifestInvalid("manifest: temperature outside [0, 2]");
        }
        if ((cfg.flags.label_desc && !m.task.descriptions) ||
            (cfg.flags.nudges && !m.task.nudges) || (cfg.flags.few_shot && !m.task.few_shot)) {
            throw ManifestInvalid("manifest: config " + cfg.notation() + " needs a component task '" +
                                  m.task.task_id + "' does not define");
        }
    }
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) {
        throw ManifestInvalid("manifest not found: " + path.string());
    }
    auto base = std::filesystem::absolute(path).parent_path();
    return parse_manifest(read_file(path), base);
}

} // namespace promptsweep
