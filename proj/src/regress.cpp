#include "ecx/regress.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <set>

#include "ecx/csv.hpp"

namespace ecx {

YearSeries backward_mean(const YearSeries& series, int window) {
    if (window < 1) throw ComputeError("backward_mean: window must be >= 1");
    YearSeries out(series.first_year(), series.last_year());
    for (int t = series.first_year(); t <= series.last_year(); ++t) {
        double acc = 0.0;
        bool complete = true;
        for (int j = 0; j < window; ++j) {
            const auto v = series.at(t - j);
            if (!v) {
                complete = false;
                break;
            }
            acc += *v;
        }
        if (complete) out.set(t, acc / static_cast<double>(window));
    }
    return out;
}

std::optional<double> growth(const YearSeries& smoothed, int t, int dt, std::string* reason) {
    const auto now = smoothed.at(t);
    const auto later = smoothed.at(t + dt);
    if (!now || !later) {
        if (reason != nullptr) *reason = "smoothed revenue window incomplete";
        return std::nullopt;
    }
    if (*now <= 0.0 || *later <= 0.0) {
        if (reason != nullptr) *reason = "nonpositive smoothed revenue";
        return std::nullopt;
    }
    return std::log(*later / *now);
}

double symlog(double x) { return x >= 0.0 ? std::log1p(x) : -std::log1p(-x); }

YearSeries profit_per_employee(const FinancialPanel& fin, int firm, int first_year, int last_year) {
    YearSeries ratio(first_year, last_year);
    for (int t = first_year; t <= last_year; ++t) {
        const FinancialRecord* rec = fin.find(firm, t);
        if (rec == nullptr || !rec->employees || !rec->net_income) continue;
        ratio.set(t, *rec->net_income / *rec->employees);
    }
    YearSeries smoothed = backward_mean(ratio, 3);
    YearSeries out(first_year, last_year);
    for (int t = first_year; t <= last_year; ++t)
        if (const auto v = smoothed.at(t)) out.set(t, symlog(*v));
    return out;
}

namespace {

// One candidate row of the design; covariate extraction reports the first
// failing field so deletions are auditable.
struct RowBuild {
    std::vector<double> covariates;
    double response = 0.0;
    std::string failure;
    bool ok = false;
};

std::optional<double> smoothed_at(const YearSeries& s, int t) { return backward_mean(s, 3).at(t); }

RowBuild build_row(const FirmVariables& v, int section, const RegressionSpec& spec) {
    RowBuild row;
    const int t = spec.t_star;

    if (section < 1) {
        row.failure = "no sector assignment";
        return row;
    }

    // Dependent variable, measured at t* + dt.
    const YearSeries revenue_bar = backward_mean(v.revenue, 3);
    if (spec.dependent == Dependent::Growth) {
        std::string reason;
        const auto g = growth(revenue_bar, t, spec.delta_t, &reason);
        if (!g) {
            row.failure = reason;
            return row;
        }
        row.response = *g;
    } else {
        const auto ratio_bar = smoothed_at(v.profit_ratio, t + spec.delta_t);
        if (!ratio_bar) {
            row.failure = "profit-per-employee window incomplete";
            return row;
        }
        row.response = symlog(*ratio_bar);
    }

    // Covariates, backward means measured at t*.
    const auto rev = revenue_bar.at(t);
    if (!rev) {
        row.failure = "revenue window incomplete at t*";
        return row;
    }
    if (*rev <= 0.0) {
        row.failure = "nonpositive smoothed revenue";
        return row;
    }
    const auto coh = smoothed_at(v.coherence, t);
    if (!coh) {
        row.failure = "coherence window incomplete";
        return row;
    }
    if (*coh <= 0.0) {
        row.failure = "log of nonpositive coherence";
        return row;
    }
    const auto expy_bar = smoothed_at(v.expy, t);
    if (!expy_bar) {
        row.failure = "expy window incomplete";
        return row;
    }
    const auto din = smoothed_at(v.d_in, t);
    const auto dout = smoothed_at(v.d_out, t);
    if (!din || !dout) {
        row.failure = "diversification window incomplete";
        return row;
    }
    double din_term, dout_term;
    if (spec.log1p_diversification) {
        din_term = std::log1p(*din);
        dout_term = std::log1p(*dout);
    } else {
        if (*din <= 0.0) {
            row.failure = "log of zero diversification (in-block)";
            return row;
        }
        if (*dout <= 0.0) {
            row.failure = "log of zero diversification (out-of-block)";
            return row;
        }
        din_term = std::log(*din);
        dout_term = std::log(*dout);
    }

    row.covariates = {std::log(*rev), std::log(*coh), *expy_bar, dout_term, din_term};
    if (spec.include_avg_complexity) {
        const auto cx = smoothed_at(v.avg_complexity, t);
        if (!cx) {
            row.failure = "complexity window incomplete";
            return row;
        }
        row.covariates.push_back(*cx);
    }
    row.ok = true;
    return row;
}

} // namespace

Design assemble_design(const VariablePanel& panel, const RegressionSpec& spec) {
    std::vector<RowBuild> rows;
    std::vector<int> firm_ids;
    std::map<std::string, int> deletions;
    std::set<int> sections_present;

    for (int f = 0; f < panel.firms.size(); ++f) {
        RowBuild row = build_row(panel.vars[static_cast<std::size_t>(f)],
                                 panel.section[static_cast<std::size_t>(f)], spec);
        if (!row.ok) {
            ++deletions[row.failure];
            continue;
        }
        sections_present.insert(panel.section[static_cast<std::size_t>(f)]);
        rows.push_back(std::move(row));
        firm_ids.push_back(f);
    }
    if (rows.empty()) throw ComputeError("assemble_design: no rows survive listwise deletion");

    Design design;
    design.firm_ids = std::move(firm_ids);
    design.deletions = std::move(deletions);
    design.reference_section = *sections_present.begin(); // lowest index is the baseline

    design.columns = {"Constant", "log Operative Revenue", "log Coherence", "EXPY",
                      "log Out-of-block Diversification", "log In-block Diversification"};
    if (spec.log1p_diversification) {
        design.columns[4] = "log1p Out-of-block Diversification";
        design.columns[5] = "log1p In-block Diversification";
    }
    if (spec.include_avg_complexity) design.columns.push_back("Average Complexity");
    std::vector<int> dummy_sections;
    for (int s : sections_present)
        if (s != design.reference_section) {
            dummy_sections.push_back(s);
            design.columns.push_back("Sector " + std::to_string(s));
        }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(design.columns.size());
    design.X = Eigen::MatrixXd::Zero(n, k);
    design.y = Eigen::VectorXd(n);
    const auto n_cov = static_cast<Eigen::Index>(rows.front().covariates.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        design.y(i) = row.response;
        design.X(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < n_cov; ++j) design.X(i, 1 + j) = row.covariates[static_cast<std::size_t>(j)];
        const int section = panel.section[static_cast<std::size_t>(design.firm_ids[static_cast<std::size_t>(i)])];
        for (std::size_t d = 0; d < dummy_sections.size(); ++d)
            if (dummy_sections[d] == section) design.X(i, 1 + n_cov + static_cast<Eigen::Index>(d)) = 1.0;
    }

    // Rank check with the offending columns named.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        const auto perm = qr.colsPermutation().indices();
        std::string offenders;
        for (Eigen::Index j = qr.rank(); j < k; ++j) {
            if (!offenders.empty()) offenders += ", ";
            offenders += design.columns[static_cast<std::size_t>(perm(j))];
        }
        throw ComputeError("assemble_design: design matrix is rank deficient; dependent columns: " + offenders);
    }
    return design;
}

std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

RegressionResult ols_hc1(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const std::vector<std::string>& columns) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (n <= k) throw ComputeError("ols_hc1: need more observations than columns");

    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) throw ComputeError("ols_hc1: X'X is singular");
    const Eigen::MatrixXd xtx_inv = lu.inverse();

    RegressionResult res;
    res.terms = columns;
    res.n = n;
    res.k = k;
    res.beta = xtx_inv * (X.transpose() * y);
    res.residuals = y - X * res.beta;

    // HC1 sandwich: N/(N-k) * (X'X)^-1 X' diag(e^2) X (X'X)^-1.
    const Eigen::MatrixXd meat =
        X.transpose() * res.residuals.array().square().matrix().asDiagonal() * X;
    const Eigen::MatrixXd cov =
        (static_cast<double>(n) / static_cast<double>(n - k)) * xtx_inv * meat * xtx_inv;

    res.se = cov.diagonal().array().max(0.0).sqrt();
    res.tstat = Eigen::VectorXd(k);
    res.pvalue = Eigen::VectorXd(k);
    const boost::math::students_t dist(static_cast<double>(n - k));
    for (Eigen::Index j = 0; j < k; ++j) {
        if (res.se(j) == 0.0) {
            res.tstat(j) = res.beta(j) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            res.pvalue(j) = res.beta(j) == 0.0 ? 1.0 : 0.0;
            continue;
        }
        res.tstat(j) = res.beta(j) / res.se(j);
        res.pvalue(j) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.tstat(j))));
    }

    const double ss_res = res.residuals.squaredNorm();
    const double y_mean = y.mean();
    const double ss_tot = (y.array() - y_mean).square().sum();
    if (ss_tot <= 0.0) throw ComputeError("ols_hc1: response has zero variance");
    const double r2 = 1.0 - ss_res / ss_tot;
    res.adj_r2 = 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - k);
    return res;
}

namespace {

bool is_display_term(const std::string& term) {
    return term != "Constant" && term.rfind("Sector ", 0) != 0;
}

} // namespace

std::string regression_table(const std::vector<RegressionResult>& results) {
    // Shared row labels: the union of displayed terms, in first-seen order.
    std::vector<std::string> terms;
    for (const auto& r : results)
        for (const auto& t : r.terms)
            if (is_display_term(t) && std::find(terms.begin(), terms.end(), t) == terms.end())
                terms.push_back(t);

    const std::size_t label_width = 36;
    const std::size_t col_width = 22;
    auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s.append(width - s.size(), ' ');
        return s;
    };

    std::string line(label_width + col_width * results.size(), '-');
    std::string tbl = line + "\n";
    tbl += pad("", label_width);
    for (const auto& r : results) tbl += pad(r.label, col_width);
    tbl += "\n" + line + "\n";

    auto coefficient_of = [](const RegressionResult& r, const std::string& term)
        -> std::optional<Eigen::Index> {
        for (std::size_t j = 0; j < r.terms.size(); ++j)
            if (r.terms[j] == term) return static_cast<Eigen::Index>(j);
        return std::nullopt;
    };

    for (const auto& term : terms) {
        tbl += pad(term, label_width);
        for (const auto& r : results) {
            const auto j = coefficient_of(r, term);
            tbl += pad(j ? format_fixed(r.beta(*j), 3) + significance_stars(r.pvalue(*j)) : "", col_width);
        }
        tbl += "\n" + pad("", label_width);
        for (const auto& r : results) {
            const auto j = coefficient_of(r, term);
            tbl += pad(j ? "(" + format_fixed(r.se(*j), 3) + ")" : "", col_width);
        }
        tbl += "\n";
    }

    tbl += pad("Sector dummies", label_width);
    for (std::size_t i = 0; i < results.size(); ++i) tbl += pad("YES", col_width);
    tbl += "\n" + line + "\n";
    tbl += pad("Observations", label_width);
    for (const auto& r : results) tbl += pad(std::to_string(r.n), col_width);
    tbl += "\n" + pad("Adjusted R-squared", label_width);
    for (const auto& r : results) tbl += pad(format_fixed(r.adj_r2, 3), col_width);
    tbl += "\n" + line + "\n";
    tbl += "Robust standard errors in parentheses (HC1). ***p<0.01, **p<0.05, *p<0.1.\n";
    return tbl;
}

void write_regression_csv(const std::vector<RegressionResult>& results, const std::string& path) {
    CsvWriter out(path, {"model_id", "term", "estimate", "se_hc1", "t", "p", "stars", "n", "adj_r2"});
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        for (std::size_t j = 0; j < r.terms.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            out.row({r.label.empty() ? std::to_string(i) : r.label, r.terms[j], format_double(r.beta(jj)),
                     format_double(r.se(jj)), format_double(r.tstat(jj)), format_double(r.pvalue(jj)),
                     significance_stars(r.pvalue(jj)), std::to_string(r.n), format_double(r.adj_r2)});
        }
    }
    out.close();
}

} // namespace ecx
