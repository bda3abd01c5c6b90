#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace htnagent::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Splits on '\n'. A trailing newline does not produce an empty final line.
std::vector<std::string> split_lines(std::string_view s);

/// Splits on runs of ASCII whitespace, dropping empty tokens.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Positional "{}" substitution with "{{" / "}}" escapes, the way Python's
/// str.format treats a template with only anonymous fields. Any other brace
/// is copied through untouched, so JSON-looking template text survives.
/// Surplus arguments are ignored; missing ones render empty.
std::string format_positional(std::string_view tmpl, const std::vector<std::string>& args);

/// Reads a whole file as bytes. Throws htnagent::Error when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace htnagent::text
