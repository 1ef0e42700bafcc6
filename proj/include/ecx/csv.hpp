#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecx/common.hpp"

namespace ecx {

// Header-driven delimited reader. No quoting: the schemas this tool consumes
// are plain identifiers and decimal numbers.
class CsvReader {
public:
    CsvReader(const std::string& path, char delimiter = ',');

    const std::vector<std::string>& header() const { return header_; }

    // Column position for `name`, or throws ValidationError.
    std::size_t column(const std::string& name) const;

    // Calls `fn(line_number, fields)` for every data row. Line numbers are
    // 1-based file lines (header is line 1). Rows with a wrong field count are
    // passed to `bad_row` instead when provided, otherwise reported as a throw.
    void for_each_row(const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn,
                      const std::function<void(std::size_t, const std::string&)>& bad_row = nullptr);

private:
    std::string path_;
    char delimiter_;
    std::string content_;
    std::vector<std::string> header_;
    std::size_t data_offset_ = 0;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header, char delimiter = ',');
    ~CsvWriter();

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::string path_;
    char delimiter_;
    std::string buffer_;
    std::size_t columns_;
    bool closed_ = false;
};

// Locale-independent numeric parsing/formatting helpers.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips a double (used by every machine
// output so reruns are byte-identical).
std::string format_double(double v);
std::string format_fixed(double v, int digits);

} // namespace ecx
