#pragma once
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "promptsweep/task_model.hpp"

namespace promptsweep {

// Fixed block headers. Each optional block is recognisable by its header,
// so tests can grep a rendered prompt for component presence.
inline constexpr std::string_view kBareLabelHeader = "Candidate labels:";
inline constexpr std::string_view kDescribedLabelHeader =
    "Candidate labels, each followed by a description of the texts that belong to it:";
inline constexpr std::string_view kNudgeHeader = "Here are some notes:";
inline constexpr std::string_view kFewShotHeaderPrefix = "Here are a few example texts that belong to the \"";
inline constexpr std::string_view kInputHeader = "Texts to classify:";

struct AssembledPrompt {
    std::string text;
    PromptConfig config;
    std::size_t batch_index = 0;
    std::vector<std::string> batch_ids;
    std::string content_hash;  // sha256 of text
};

// Block order: instruction header, label block, nudges (iff N), few-shot
// (iff F), format directive, numbered inputs. Blocks are separated by one
// blank line, lines carry no trailing whitespace, and the text ends in '\n'.
// Errors: MissingBlock, OversizedBatch, InvariantViolation on an empty batch.
AssembledPrompt assemble_prompt(const TaskSpec& spec, const PromptConfig& config,
                                const Batch& batch);

std::string render_format_directive(std::size_t k);

// Appended to a prompt when the first answer could not be aligned.
std::string render_repair_suffix(std::size_t k);

// Writes `<dir>/<config hash>/<batch index>.txt`.
void dump_prompt(const std::filesystem::path& dir, const AssembledPrompt& prompt);

} // namespace promptsweep
