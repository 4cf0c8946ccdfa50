#pragma once

#include <string>
#include <vector>

namespace selfmap {

// 17 significant digits: enough for exact double round trips.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Splits one CSV line at commas (no quoting; none of our fields need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace selfmap
