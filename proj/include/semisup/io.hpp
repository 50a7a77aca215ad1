#pragma once

#include <string>
#include <vector>

namespace semisup {

// Shortest round-trip decimal representation (std::to_chars). Used for every
// numeric CSV field so artifacts are byte-stable across runs.
std::string format_double(double value);

double parse_double(const std::string& text);
long long parse_int(const std::string& text);

std::vector<std::string> split_csv_line(const std::string& line);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace semisup
