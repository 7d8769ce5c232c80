#include "promptsweep/prompt_assembler.hpp"

#include <fstream>
#include <sstream>

#include "promptsweep/error.hpp"
#include "promptsweep/hashing.hpp"
#include "promptsweep/text.hpp"

namespace promptsweep {
namespace {

// Input items must stay on one line so the numbered protocol holds.
std::string single_line(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            out.push_back(' ');
        } else if (c == '\n') {
            out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    return std::string(trim(out));
}

std::string strip_trailing_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const auto& line : split_lines(text)) {
        auto end = line.find_last_not_of(" \t\f\v");
        out.append(line, 0, end == std::string::npos ? 0 : end + 1);
        out.push_back('\n');
    }
    return out;
}

void render_label_block(std::ostringstream& ss, const TaskSpec& spec, bool described) {
    if (described) {
        ss << kDescribedLabelHeader << '\n';
        for (const auto& label : spec.labels) {
            ss << "- " << label << ": " << trim(spec.descriptions->at(label)) << '\n';
        }
    } else {
        ss << kBareLabelHeader << '\n';
        for (const auto& label : spec.labels) ss << "- " << label << '\n';
    }
}

void render_few_shot_block(std::ostringstream& ss, const TaskSpec& spec) {
    bool first = true;
    for (const auto& label : spec.labels) {
        auto it = spec.few_shot->find(label);
        if (it == spec.few_shot->end() || it->second.empty()) continue;
        if (!first) ss << '\n';
        first = false;
        ss << kFewShotHeaderPrefix << label << "\" category:\n\n";
        std::size_t n = 1;
        for (const auto& example : it->second) {
            ss << n++ << ": '" << trim(example) << "'\n";
        }
    }
}

} // namespace

std::string render_format_directive(std::size_t k) {
    if (k == 0) throw InvariantViolation("format directive needs k >= 1");
    std::ostringstream ss;
    if (k == 1) {
        ss << "Classify the 1 text below, numbered 1.";
    } else {
        ss << "Classify the " << k << " texts below, numbered 1 to " << k << '.';
    }
    ss << " Give me only the text number and the label, and put one label per line."
          " Use ': ' to separate numbers from labels."
          " Don't use any label which is not listed among the candidate labels.";
    return ss.str();
}

std::string render_repair_suffix(std::size_t k) {
    return "Your previous answer could not be read. Answer again using exactly this format. " +
           render_format_directive(k) + '\n';
}

AssembledPrompt assemble_prompt(const TaskSpec& spec, const PromptConfig& config,
                                const Batch& batch) {
    if (batch.items.empty()) throw InvariantViolation("cannot assemble a prompt for an empty batch");
    if (batch.items.size() > config.batch_size) {
        throw OversizedBatch("batch of " + std::to_string(batch.items.size()) +
                             " exceeds configured batch size " +
                             std::to_string(config.batch_size));
    }
    if (config.flags.label_desc && !spec.descriptions) {
        throw MissingBlock("label descriptions requested but task '" + spec.task_id +
                           "' has none");
    }
    if (config.flags.nudges && !spec.nudges) {
        throw MissingBlock("instructional nudges requested but task '" + spec.task_id +
                           "' has none");
    }
    if (config.flags.few_shot && !spec.few_shot) {
        throw MissingBlock("few-shot examples requested but task '" + spec.task_id +
                           "' has none");
    }

    std::ostringstream ss;
    ss << trim(spec.instruction_header) << "\n\n";
    render_label_block(ss, spec, config.flags.label_desc);
    if (config.flags.nudges) {
        ss << '\n' << kNudgeHeader << "\n\n" << trim(*spec.nudges) << '\n';
    }
    if (config.flags.few_shot) {
        ss << '\n';
        render_few_shot_block(ss, spec);
    }
    ss << '\n' << render_format_directive(batch.items.size()) << "\n\n";
    ss << kInputHeader << '\n';
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
        ss << (i + 1) << ": " << single_line(batch.items[i].text) << '\n';
    }

    AssembledPrompt prompt;
    prompt.text = strip_trailing_whitespace(ss.str());
    prompt.config = config;
    prompt.batch_index = batch.index;
    for (const auto& item : batch.items) prompt.batch_ids.push_back(item.item_id);
    prompt.content_hash = sha256_hex(prompt.text);
    return prompt;
}

void dump_prompt(const std::filesystem::path& dir, const AssembledPrompt& prompt) {
    auto sub = dir / prompt.config.config_hash();
    std::filesystem::create_directories(sub);
    std::ofstream out(sub / (std::to_string(prompt.batch_index) + ".txt"), std::ios::binary);
    out << prompt.text;
    if (!out) throw std::runtime_error("failed to write prompt dump under " + sub.string());
}

} // namespace promptsweep
