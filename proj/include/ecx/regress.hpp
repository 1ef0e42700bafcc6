#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecx/common.hpp"
#include "ecx/panel.hpp"

namespace ecx {

// Yearly values with explicit gaps.
class YearSeries {
public:
    YearSeries() = default;
    YearSeries(int first_year, int last_year)
        : start_(first_year), values_(static_cast<std::size_t>(last_year - first_year + 1)) {}

    void set(int year, double value) { values_.at(index(year)) = value; }
    std::optional<double> at(int year) const {
        if (year < start_ || year >= start_ + static_cast<int>(values_.size())) return std::nullopt;
        return values_[index(year)];
    }
    int first_year() const { return start_; }
    int last_year() const { return start_ + static_cast<int>(values_.size()) - 1; }

private:
    std::size_t index(int year) const { return static_cast<std::size_t>(year - start_); }
    int start_ = 0;
    std::vector<std::optional<double>> values_;
};

// Backward-looking mean over `window` years; defined only where the full
// window is present.
YearSeries backward_mean(const YearSeries& series, int window = 3);

// G = ln(smoothed(t + dt) / smoothed(t)). Missing or nonpositive inputs give
// nullopt with the reason when requested.
std::optional<double> growth(const YearSeries& smoothed, int t, int dt = 4, std::string* reason = nullptr);

// sign(x) * ln(1 + |x|): odd, continuous, identity slope at zero.
double symlog(double x);

// Yearly net income / employees, backward-3-mean, then symlog.
YearSeries profit_per_employee(const FinancialPanel& fin, int firm, int first_year, int last_year);

// Per-firm yearly inputs to the cross-sectional models.
struct FirmVariables {
    YearSeries revenue;        // operating revenue O_{f,t}
    YearSeries profit_ratio;   // net income / employees, untransformed
    YearSeries expy;
    YearSeries coherence;
    YearSeries d_in;
    YearSeries d_out;
    YearSeries avg_complexity;
};

struct VariablePanel {
    Interner firms;
    std::vector<FirmVariables> vars;
    std::vector<int> section; // HS section 1..21, -1 when unassigned
};

enum class Dependent { Growth, ProfitPerEmployee };

struct RegressionSpec {
    Dependent dependent = Dependent::Growth;
    bool include_avg_complexity = false;
    int t_star = 2015;
    int delta_t = 4;
    bool log1p_diversification = false; // sensitivity variant for zero counts
    std::string label;                  // column header in the report table
};

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> columns;
    std::vector<int> firm_ids;               // panel indices of surviving rows
    std::map<std::string, int> deletions;     // reason -> dropped firms
    int reference_section = -1;               // dummy dropped as baseline
};

struct RegressionResult {
    std::string label;
    std::vector<std::string> terms;
    Eigen::VectorXd beta;
    Eigen::VectorXd se;   // HC1 robust
    Eigen::VectorXd tstat;
    Eigen::VectorXd pvalue;
    double adj_r2 = 0.0;
    long n = 0;
    long k = 0;
    Eigen::VectorXd residuals;
    std::map<std::string, int> deletions;
    int reference_section = -1;
};

// Covariates are backward-3-year means measured at t*; logs on operating
// revenue, coherence and the two diversification counts; EXPY and average
// complexity enter raw. Rows with any missing field are dropped and counted.
Design assemble_design(const VariablePanel& panel, const RegressionSpec& spec);

RegressionResult ols_hc1(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const std::vector<std::string>& columns);

std::string significance_stars(double p);

// Side-by-side text table in the journal layout: coefficient, (SE), stars,
// the sector-dummy line, observations and adjusted R-squared.
std::string regression_table(const std::vector<RegressionResult>& results);

void write_regression_csv(const std::vector<RegressionResult>& results, const std::string& path);

} // namespace ecx
