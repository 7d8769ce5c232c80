#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace promptsweep::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader. Accepts CRLF or LF record separators and a UTF-8 BOM.
// Throws std::invalid_argument on an unterminated quoted field or a stray
// quote inside an unquoted field.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string format_row(const Row& row);

} // namespace promptsweep::csv
