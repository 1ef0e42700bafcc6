#include "ecx/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ecx {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ValidationError("cannot read file: " + path);
    return ss.str();
}

void split_line(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

CsvReader::CsvReader(const std::string& path, char delimiter)
    : path_(path), delimiter_(delimiter), content_(read_file(path)) {
    std::size_t eol = content_.find('\n');
    std::string_view header_line(content_.data(), eol == std::string::npos ? content_.size() : eol);
    if (!header_line.empty() && header_line.back() == '\r') header_line.remove_suffix(1);
    if (header_line.empty()) throw ValidationError(path + ": missing header row");
    std::vector<std::string_view> fields;
    split_line(header_line, delimiter_, fields);
    for (auto f : fields) header_.emplace_back(f);
    data_offset_ = eol == std::string::npos ? content_.size() : eol + 1;
}

std::size_t CsvReader::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw ValidationError(path_ + ": header has no column '" + name + "'");
}

void CsvReader::for_each_row(const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn,
                             const std::function<void(std::size_t, const std::string&)>& bad_row) {
    std::vector<std::string_view> fields;
    std::size_t line_no = 1; // header
    std::size_t pos = data_offset_;
    const std::size_t size = content_.size();
    while (pos < size) {
        std::size_t eol = content_.find('\n', pos);
        std::size_t len = (eol == std::string::npos ? size : eol) - pos;
        std::string_view line(content_.data() + pos, len);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol == std::string::npos ? size : eol + 1;
        ++line_no;
        if (line.empty()) continue;
        split_line(line, delimiter_, fields);
        if (fields.size() != header_.size()) {
            std::string msg = "expected " + std::to_string(header_.size()) + " fields, got " +
                              std::to_string(fields.size());
            if (bad_row)
                bad_row(line_no, msg);
            else
                throw ValidationError(path_ + ":" + std::to_string(line_no) + ": " + msg);
            continue;
        }
        fn(line_no, fields);
    }
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header, char delimiter)
    : path_(path), delimiter_(delimiter), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_.push_back(delimiter_);
        buffer_ += header[i];
    }
    buffer_.push_back('\n');
}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
        }
    }
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_)
        throw ComputeError(path_ + ": row with " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(columns_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_.push_back(delimiter_);
        buffer_ += fields[i];
    }
    buffer_.push_back('\n');
}

void CsvWriter::close() {
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path_);
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw ValidationError("write failed: " + path_);
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[64];
    // %.17g round-trips but prints noise; try increasing precision until exact.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return buf;
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace ecx
