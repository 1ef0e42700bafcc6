#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ecx {

// Fatal problems with inputs or configuration. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fatal problems inside a computation (singular systems, undefined ratios, ...).
// The CLI maps these to exit code 2.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Accumulated non-fatal diagnostics. Every dropped row, excluded product or
// unconverged solve lands here so the run manifest can surface it.
class WarningLog {
public:
    void add(std::string msg) { messages_.push_back(std::move(msg)); }
    const std::vector<std::string>& messages() const { return messages_; }
    bool empty() const { return messages_.empty(); }
    std::size_t size() const { return messages_.size(); }

private:
    std::vector<std::string> messages_;
};

// Bidirectional map between opaque string identifiers (firm ids, country codes,
// HS codes) and dense integer indices used for matrix addressing.
class Interner {
public:
    int intern(std::string_view s) {
        auto it = index_.find(std::string(s));
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(names_.size());
        names_.emplace_back(s);
        index_.emplace(names_.back(), id);
        return id;
    }

    // -1 when unknown.
    int find(std::string_view s) const {
        auto it = index_.find(std::string(s));
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> names_;
};

inline bool is_hs6(std::string_view s) {
    if (s.size() != 6) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline bool is_hs4(std::string_view s) {
    if (s.size() != 4) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

constexpr int kHsSectionCount = 21;

} // namespace ecx
