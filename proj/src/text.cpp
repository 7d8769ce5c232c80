#include "promptsweep/text.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace promptsweep {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_wrapper(char c) {
    return c == '"' || c == '\'' || c == '.' || c == '`';
}

} // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string normalize_key(std::string_view raw) {
    std::string_view s = raw;
    // strip whitespace and wrapper punctuation from both ends until stable
    while (!s.empty() && (is_space(s.front()) || is_wrapper(s.front()))) s.remove_prefix(1);
    while (!s.empty() && (is_space(s.back()) || is_wrapper(s.back()))) s.remove_suffix(1);

    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
    }
    return out;
}

std::string format_fixed3(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::fixed, 3);
    if (ec != std::errc{}) throw std::runtime_error("format_fixed3: to_chars failed");
    std::string out(buf.data(), end);
    if (out == "-0.000") out = "0.000";
    return out;
}

std::string format_shortest(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::runtime_error("format_shortest: to_chars failed");
    return std::string(buf.data(), end);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
    }
    return lines;
}

} // namespace promptsweep
