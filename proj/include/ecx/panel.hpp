#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ecx/common.hpp"

namespace ecx {

// Column mapping for the delimited inputs. Defaults match the canonical
// schemas written by the synthetic generator.
struct CsvSchema {
    char delimiter = ',';
    std::string firm_col = "firm_id";
    std::string product_col = "hs6";
    std::string year_col = "year";
    std::string value_col = "value";
    std::string employees_col = "employees";
    std::string revenue_col = "operating_revenue";
    std::string income_col = "net_income";
    std::string country_col = "country";
    std::string gdp_col = "gdp_pc";
    int year_min = 1900;
    int year_max = 2100;
};

struct RejectedRow {
    std::size_t line;
    std::string reason;
};

struct LoadReport {
    std::size_t rows_total = 0;
    std::size_t rows_accepted = 0; // rows, before duplicate summing
    std::size_t rows_rejected = 0;
    double value_accepted = 0.0;
    double value_rejected = 0.0; // rows rejected for non-value reasons but with a parseable value
    std::vector<RejectedRow> rejections;
};

// One (exporter, product, year, value) observation. Exporter ids are opaque:
// the same panel type carries firm-level and country-level ("world trade") data.
struct ExportRecord {
    int firm;
    int product;
    int year;
    double value;
};

class ExportPanel {
public:
    ExportPanel() = default;
    ExportPanel(Interner firms, Interner products, std::vector<ExportRecord> records);

    const Interner& firms() const { return firms_; }
    const Interner& products() const { return products_; }
    const std::vector<ExportRecord>& records() const { return records_; }

    int year_min() const { return year_min_; }
    int year_max() const { return year_max_; }
    bool empty() const { return records_.empty(); }

private:
    Interner firms_;
    Interner products_;
    std::vector<ExportRecord> records_; // sorted by (firm, product, year), duplicates summed
    int year_min_ = 0;
    int year_max_ = -1;
};

struct FinancialRecord {
    int firm;
    int year;
    std::optional<double> employees;
    std::optional<double> operating_revenue;
    std::optional<double> net_income;
};

class FinancialPanel {
public:
    FinancialPanel() = default;
    FinancialPanel(Interner firms, std::vector<FinancialRecord> records);

    const Interner& firms() const { return firms_; }
    const std::vector<FinancialRecord>& records() const { return records_; }

    // Missingness is explicit: absent (firm, year) pairs return nullptr.
    const FinancialRecord* find(std::string_view firm_name, int year) const;
    const FinancialRecord* find(int firm, int year) const;

private:
    Interner firms_;
    std::vector<FinancialRecord> records_;
    std::unordered_map<std::uint64_t, std::size_t> by_key_;
};

class GdpTable {
public:
    GdpTable() = default;
    GdpTable(Interner countries, std::vector<double> gdp_pc);

    const Interner& countries() const { return countries_; }
    double gdp_pc(int country) const { return gdp_pc_.at(static_cast<std::size_t>(country)); }
    std::optional<double> find(std::string_view country_name) const;
    int size() const { return countries_.size(); }

private:
    Interner countries_;
    std::vector<double> gdp_pc_;
};

struct HsEntry {
    std::string hs4;
    int section; // 1..21
    std::string section_label;
};

class HsMap {
public:
    void insert(const std::string& hs6, HsEntry entry);
    // Throws ValidationError when the code is unmapped.
    const HsEntry& resolve(const std::string& hs6) const;
    const HsEntry* try_resolve(const std::string& hs6) const;
    // Section for an HS4 heading (taken from any member HS6); -1 if unknown.
    int section_of_hs4(const std::string& hs4) const;
    std::size_t size() const { return map_.size(); }
    int distinct_sections() const;

private:
    std::unordered_map<std::string, HsEntry> map_;
    std::unordered_map<std::string, int> hs4_section_;
};

ExportPanel load_exports(const std::string& path, const CsvSchema& schema, LoadReport& report);
FinancialPanel load_financials(const std::string& path, const CsvSchema& schema, LoadReport& report);
GdpTable load_gdp(const std::string& path, const CsvSchema& schema, LoadReport& report);
HsMap load_hs_map(const std::string& path, LoadReport& report, char delimiter = ',');

// Keeps exactly the firms with at least one value > 0 record in every year of
// [year_from, year_to]; survivors are re-interned densely.
ExportPanel filter_persistent_firms(const ExportPanel& panel, int year_from, int year_to);

void write_exports(const ExportPanel& panel, const std::string& path);

} // namespace ecx
