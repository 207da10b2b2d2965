#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace chaotherm {

// 17 significant digits, '.' decimal regardless of locale.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    // Cells are preformatted so string-valued columns can coexist with numbers.
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    std::string str() const;
};

// Writes through a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Little-endian IEEE-754 doubles, base64 encoded.
std::string encode_doubles(const std::vector<double>& values);
std::vector<double> decode_doubles(const std::string& text);

}  // namespace chaotherm
