#include "ecx/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ecx/csv.hpp"

namespace ecx {

namespace {

std::uint64_t firm_year_key(int firm, int year) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(firm)) << 32) |
           static_cast<std::uint32_t>(year);
}

void reject(LoadReport& report, std::size_t line, std::string reason, std::optional<double> value = {}) {
    ++report.rows_rejected;
    if (value) report.value_rejected += *value;
    report.rejections.push_back({line, std::move(reason)});
}

} // namespace

ExportPanel::ExportPanel(Interner firms, Interner products, std::vector<ExportRecord> records)
    : firms_(std::move(firms)), products_(std::move(products)), records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const ExportRecord& a, const ExportRecord& b) {
        if (a.firm != b.firm) return a.firm < b.firm;
        if (a.product != b.product) return a.product < b.product;
        return a.year < b.year;
    });
    // Sum duplicate (firm, product, year) rows: export declarations are additive.
    std::size_t out = 0;
    for (std::size_t i = 0; i < records_.size();) {
        ExportRecord merged = records_[i];
        std::size_t j = i + 1;
        while (j < records_.size() && records_[j].firm == merged.firm &&
               records_[j].product == merged.product && records_[j].year == merged.year) {
            merged.value += records_[j].value;
            ++j;
        }
        records_[out++] = merged;
        i = j;
    }
    records_.resize(out);
    if (!records_.empty()) {
        year_min_ = records_.front().year;
        year_max_ = records_.front().year;
        for (const auto& r : records_) {
            year_min_ = std::min(year_min_, r.year);
            year_max_ = std::max(year_max_, r.year);
        }
    }
}

FinancialPanel::FinancialPanel(Interner firms, std::vector<FinancialRecord> records)
    : firms_(std::move(firms)), records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const FinancialRecord& a, const FinancialRecord& b) {
        if (a.firm != b.firm) return a.firm < b.firm;
        return a.year < b.year;
    });
    for (std::size_t i = 0; i < records_.size(); ++i)
        by_key_[firm_year_key(records_[i].firm, records_[i].year)] = i;
}

const FinancialRecord* FinancialPanel::find(std::string_view firm_name, int year) const {
    int id = firms_.find(firm_name);
    if (id < 0) return nullptr;
    return find(id, year);
}

const FinancialRecord* FinancialPanel::find(int firm, int year) const {
    auto it = by_key_.find(firm_year_key(firm, year));
    return it == by_key_.end() ? nullptr : &records_[it->second];
}

GdpTable::GdpTable(Interner countries, std::vector<double> gdp_pc)
    : countries_(std::move(countries)), gdp_pc_(std::move(gdp_pc)) {}

std::optional<double> GdpTable::find(std::string_view country_name) const {
    int id = countries_.find(country_name);
    if (id < 0) return std::nullopt;
    return gdp_pc_[static_cast<std::size_t>(id)];
}

void HsMap::insert(const std::string& hs6, HsEntry entry) {
    hs4_section_[entry.hs4] = entry.section;
    map_[hs6] = std::move(entry);
}

const HsEntry& HsMap::resolve(const std::string& hs6) const {
    auto it = map_.find(hs6);
    if (it == map_.end()) throw ValidationError("HS map does not cover code " + hs6);
    return it->second;
}

const HsEntry* HsMap::try_resolve(const std::string& hs6) const {
    auto it = map_.find(hs6);
    return it == map_.end() ? nullptr : &it->second;
}

int HsMap::section_of_hs4(const std::string& hs4) const {
    auto it = hs4_section_.find(hs4);
    return it == hs4_section_.end() ? -1 : it->second;
}

int HsMap::distinct_sections() const {
    bool seen[kHsSectionCount + 1] = {};
    int n = 0;
    for (const auto& [hs6, e] : map_)
        if (!seen[e.section]) {
            seen[e.section] = true;
            ++n;
        }
    return n;
}

ExportPanel load_exports(const std::string& path, const CsvSchema& schema, LoadReport& report) {
    CsvReader reader(path, schema.delimiter);
    const std::size_t c_firm = reader.column(schema.firm_col);
    const std::size_t c_product = reader.column(schema.product_col);
    const std::size_t c_year = reader.column(schema.year_col);
    const std::size_t c_value = reader.column(schema.value_col);

    Interner firms, products;
    std::vector<ExportRecord> records;
    reader.for_each_row(
        [&](std::size_t line, const std::vector<std::string_view>& f) {
            ++report.rows_total;
            const auto value = parse_double(f[c_value]);
            if (!is_hs6(f[c_product])) {
                reject(report, line, "malformed HS6 code '" + std::string(f[c_product]) + "'", value);
                return;
            }
            const auto year = parse_int(f[c_year]);
            if (!year || *year < schema.year_min || *year > schema.year_max) {
                reject(report, line, "year '" + std::string(f[c_year]) + "' outside configured range", value);
                return;
            }
            if (!value || *value < 0.0 || !std::isfinite(*value)) {
                reject(report, line, "invalid export value '" + std::string(f[c_value]) + "'");
                return;
            }
            if (f[c_firm].empty()) {
                reject(report, line, "empty firm id", value);
                return;
            }
            ++report.rows_accepted;
            report.value_accepted += *value;
            records.push_back({firms.intern(f[c_firm]), products.intern(f[c_product]),
                               static_cast<int>(*year), *value});
        },
        [&](std::size_t line, const std::string& why) {
            ++report.rows_total;
            reject(report, line, why);
        });
    return ExportPanel(std::move(firms), std::move(products), std::move(records));
}

FinancialPanel load_financials(const std::string& path, const CsvSchema& schema, LoadReport& report) {
    CsvReader reader(path, schema.delimiter);
    const std::size_t c_firm = reader.column(schema.firm_col);
    const std::size_t c_year = reader.column(schema.year_col);
    const std::size_t c_emp = reader.column(schema.employees_col);
    const std::size_t c_rev = reader.column(schema.revenue_col);
    const std::size_t c_inc = reader.column(schema.income_col);

    Interner firms;
    std::vector<FinancialRecord> records;
    reader.for_each_row(
        [&](std::size_t line, const std::vector<std::string_view>& f) {
            ++report.rows_total;
            const auto year = parse_int(f[c_year]);
            if (!year || *year < schema.year_min || *year > schema.year_max) {
                reject(report, line, "year '" + std::string(f[c_year]) + "' outside configured range");
                return;
            }
            if (f[c_firm].empty()) {
                reject(report, line, "empty firm id");
                return;
            }
            FinancialRecord rec;
            rec.firm = -1;
            rec.year = static_cast<int>(*year);
            // Empty fields are explicit gaps, never zeros.
            if (!f[c_emp].empty()) {
                const auto emp = parse_double(f[c_emp]);
                if (!emp || *emp < 1.0) {
                    reject(report, line, "employees '" + std::string(f[c_emp]) + "' must be >= 1");
                    return;
                }
                rec.employees = emp;
            }
            if (!f[c_rev].empty()) {
                const auto rev = parse_double(f[c_rev]);
                if (!rev || !std::isfinite(*rev)) {
                    reject(report, line, "invalid operating_revenue '" + std::string(f[c_rev]) + "'");
                    return;
                }
                rec.operating_revenue = rev;
            }
            if (!f[c_inc].empty()) {
                const auto inc = parse_double(f[c_inc]);
                if (!inc || !std::isfinite(*inc)) {
                    reject(report, line, "invalid net_income '" + std::string(f[c_inc]) + "'");
                    return;
                }
                rec.net_income = inc;
            }
            ++report.rows_accepted;
            rec.firm = firms.intern(f[c_firm]);
            records.push_back(rec);
        },
        [&](std::size_t line, const std::string& why) {
            ++report.rows_total;
            reject(report, line, why);
        });
    return FinancialPanel(std::move(firms), std::move(records));
}

GdpTable load_gdp(const std::string& path, const CsvSchema& schema, LoadReport& report) {
    CsvReader reader(path, schema.delimiter);
    const std::size_t c_country = reader.column(schema.country_col);
    const std::size_t c_gdp = reader.column(schema.gdp_col);

    Interner countries;
    std::vector<double> gdp;
    reader.for_each_row([&](std::size_t line, const std::vector<std::string_view>& f) {
        ++report.rows_total;
        const auto v = parse_double(f[c_gdp]);
        if (!v || *v <= 0.0 || !std::isfinite(*v))
            throw ValidationError(path + ":" + std::to_string(line) + ": gdp_pc '" + std::string(f[c_gdp]) +
                                  "' must be positive (its logarithm enters the product score)");
        if (f[c_country].empty())
            throw ValidationError(path + ":" + std::to_string(line) + ": empty country code");
        int id = countries.intern(f[c_country]);
        if (id < static_cast<int>(gdp.size()))
            throw ValidationError(path + ":" + std::to_string(line) + ": duplicate country '" +
                                  std::string(f[c_country]) + "'");
        gdp.push_back(*v);
        ++report.rows_accepted;
    });
    return GdpTable(std::move(countries), std::move(gdp));
}

HsMap load_hs_map(const std::string& path, LoadReport& report, char delimiter) {
    CsvReader reader(path, delimiter);
    const std::size_t c_hs6 = reader.column("hs6");
    const std::size_t c_hs4 = reader.column("hs4");
    const std::size_t c_section = reader.column("section_index");
    const std::size_t c_label = reader.column("section_label");

    HsMap map;
    reader.for_each_row([&](std::size_t line, const std::vector<std::string_view>& f) {
        ++report.rows_total;
        std::string hs6(f[c_hs6]);
        std::string hs4(f[c_hs4]);
        if (!is_hs6(hs6)) {
            reject(report, line, "malformed HS6 code '" + hs6 + "'");
            return;
        }
        if (!is_hs4(hs4) || hs6.compare(0, 4, hs4) != 0) {
            reject(report, line, "hs4 '" + hs4 + "' is not the 4-digit prefix of '" + hs6 + "'");
            return;
        }
        const auto section = parse_int(f[c_section]);
        if (!section || *section < 1 || *section > kHsSectionCount) {
            reject(report, line, "section_index '" + std::string(f[c_section]) + "' outside 1.." +
                                     std::to_string(kHsSectionCount));
            return;
        }
        ++report.rows_accepted;
        map.insert(hs6, HsEntry{std::move(hs4), static_cast<int>(*section), std::string(f[c_label])});
    });
    return map;
}

ExportPanel filter_persistent_firms(const ExportPanel& panel, int year_from, int year_to) {
    if (year_from > year_to) throw ValidationError("filter_persistent_firms: empty year range");
    const int n_years = year_to - year_from + 1;

    // Per-firm bitmap of years with a positive-value record.
    std::vector<std::vector<bool>> covered(static_cast<std::size_t>(panel.firms().size()),
                                           std::vector<bool>(static_cast<std::size_t>(n_years), false));
    for (const auto& r : panel.records()) {
        if (r.value > 0.0 && r.year >= year_from && r.year <= year_to)
            covered[static_cast<std::size_t>(r.firm)][static_cast<std::size_t>(r.year - year_from)] = true;
    }
    std::vector<bool> keep(static_cast<std::size_t>(panel.firms().size()), false);
    for (std::size_t f = 0; f < covered.size(); ++f)
        keep[f] = std::all_of(covered[f].begin(), covered[f].end(), [](bool b) { return b; });

    Interner firms, products;
    std::vector<ExportRecord> records;
    for (const auto& r : panel.records()) {
        if (!keep[static_cast<std::size_t>(r.firm)]) continue;
        records.push_back({firms.intern(panel.firms().name(r.firm)),
                           products.intern(panel.products().name(r.product)), r.year, r.value});
    }
    return ExportPanel(std::move(firms), std::move(products), std::move(records));
}

void write_exports(const ExportPanel& panel, const std::string& path) {
    CsvWriter out(path, {"firm_id", "hs6", "year", "value"});
    for (const auto& r : panel.records())
        out.row({panel.firms().name(r.firm), panel.products().name(r.product), std::to_string(r.year),
                 format_double(r.value)});
    out.close();
}

} // namespace ecx
