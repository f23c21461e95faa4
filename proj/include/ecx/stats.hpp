#pragma once

// Statistical validation: correlations with two-sided p-values, log-space
// fits, residual rankings, degree quadrants, regional averages and rank
// agreement between two scorings.

#include "ecx/ingest.hpp"
#include "ecx/rca.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

struct Correlation {
    double r = 0;
    double p_value = 1;
    std::size_t n = 0;

    std::size_t df() const { return n - 2; }
};

// Two-sided p-value of r under the t-distribution with n - 2 degrees of
// freedom: t = r sqrt(n-2) / sqrt(1-r^2), p = I_{df/(df+t^2)}(df/2, 1/2).
// Clamped below at the smallest positive normalized double.
double p_value(double r, std::size_t n);

// Throws InputError for n < 3, mismatched lengths or "zero variance".
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Rows where both values are present.
struct PairedSample {
    std::vector<std::size_t> index;
    std::vector<double> x;
    std::vector<double> y;
};

PairedSample pairwise_complete(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y);

// Indicator values aligned to `target`, matching regions by code; regions
// absent from the macro table are nullopt.
std::vector<std::optional<double>> indicator_values(const MacroIndicators& macro, const RegionCatalog& source,
                                                    const RegionCatalog& target, Indicator indicator);

enum class FitModel { exponential, power };

std::string_view fit_model_name(FitModel model);
// "exp" | "exponential" | "power"
FitModel parse_fit_model(std::string_view name);

struct FitResult {
    FitModel model = FitModel::exponential;
    double a = 0; // scale
    double b = 0; // rate (exponential) or exponent (power)
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> residuals; // ln y - ln expected(x)
    double rmse_log = 0;

    double expected(double xi) const;
};

// y = a exp(b x), OLS of ln y on x. Labels, when given, name offending points.
FitResult fit_exponential(std::span<const double> x, std::span<const double> y,
                          std::span<const std::string> labels = {});
// y = a x^b, OLS of ln y on ln x.
FitResult fit_power(std::span<const double> x, std::span<const double> y, std::span<const std::string> labels = {});
FitResult fit(FitModel model, std::span<const double> x, std::span<const double> y,
              std::span<const std::string> labels = {});

struct ResidualEntry {
    std::string label;
    double residual = 0;
    std::size_t index = 0; // position in the fitted data
};

// Ascending residual (under-performers first), ties by label.
std::vector<ResidualEntry> residual_ranking(const FitResult& fit, std::span<const std::string> labels);

// label,x,y,expected_y,residual in residual order.
void write_fit_csv(std::ostream& out, const FitResult& fit, std::span<const std::string> labels);

// Signs of (k_p0 - <k_p0>, k_p1 - <k_p1>): Q1 (+,+), Q2 (-,+), Q3 (-,-), Q4 (+,-).
// A value on the mean counts as +.
enum class Quadrant { q1, q2, q3, q4 };

std::string_view quadrant_name(Quadrant q);
std::string_view quadrant_description(Quadrant q);

struct QuadrantClassification {
    std::vector<Quadrant> quadrant; // per region
    double mean_k_p0 = 0;
    double mean_k_p1 = 0;
};

QuadrantClassification quadrants(const DegreeProfile& profile);

// region_code,k_p0,k_p1,quadrant,description
void write_quadrants_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const DegreeProfile& profile,
                         const QuadrantClassification& q);

struct RegionGroup {
    std::string name;
    std::size_t members = 0;
    double mean_eci = 0;
    std::optional<double> mean_gpp_per_capita;      // over members with macro rows
    std::optional<double> mean_income_per_person;
};

struct RegionSummaryVariant {
    std::string name;
    std::vector<RegionGroup> groups;
    std::optional<Correlation> eci_vs_gpp_per_capita; // over groups, absent when fewer than 3
    std::optional<Correlation> eci_vs_income;
};

// Tokyo is its own group in both variants; "tokyo_separate" removes it from
// its super region, "kanto_with_tokyo" keeps it there as well.
struct RegionSummary {
    std::string tokyo_code;
    bool tokyo_present = false;
    std::string primary = "tokyo_separate";
    RegionSummaryVariant tokyo_separate;
    RegionSummaryVariant kanto_with_tokyo;
};

// Throws InputError when a region has no super region.
RegionSummary region_averages(std::span<const double> eci, std::span<const std::optional<double>> gpp_per_capita,
                              std::span<const std::optional<double>> income, const RegionCatalog& catalog,
                              std::string_view tokyo_code = "TK");

// variant,group,members,mean_eci,mean_gpp_per_capita,mean_income_per_person
void write_region_summary_csv(std::ostream& out, const RegionSummary& summary);

struct Ranking {
    std::vector<std::string> labels;
    std::vector<double> scores; // higher is better
};

struct RankRow {
    std::string label;
    std::size_t rank_a = 0;
    std::size_t rank_b = 0;
};

struct RankAgreement {
    double kendall_tau = 0; // tau-b
    std::vector<RankRow> table; // ordered by rank_a
};

// Kendall tau-b of the two scorings plus ordinal ranks side by side.
// Throws InputError when the label sets differ.
RankAgreement rank_agreement(const Ranking& a, const Ranking& b);

double kendall_tau_b(std::span<const double> x, std::span<const double> y);

} // namespace ecx
