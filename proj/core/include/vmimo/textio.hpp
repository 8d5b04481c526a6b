#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vmimo {

/// Formats a double with 6 significant digits, C locale, dot decimal
/// separator. All CSV output goes through this so golden files are stable.
std::string format_g6(double value);

/// Full-precision round-trippable double formatting for JSON payloads.
std::string format_full(double value);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& s);

}  // namespace vmimo
