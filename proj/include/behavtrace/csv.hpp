#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace behavtrace::csv {

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
/// quotes; embedded newlines are not supported. Returns false on an
/// unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

/// True when the bytes form valid UTF-8.
bool valid_utf8(std::string_view bytes);

/// Compact deterministic rendering of a double for report files.
std::string format_double(double value);

}  // namespace behavtrace::csv
