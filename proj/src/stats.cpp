#include "ecx/stats.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"
#include "ecx/ranking.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace ecx {

double p_value(double r, std::size_t n)
{
    if (n < 3) {
        throw InputError("p-value needs at least 3 observations");
    }
    if (!(std::abs(r) <= 1)) {
        throw InputError("correlation outside [-1, 1]");
    }
    const double df = static_cast<double>(n - 2);
    // df / (df + t^2) simplifies to 1 - r^2.
    const double x = (1 - r) * (1 + r);
    const double p = x <= 0 ? 0.0 : boost::math::ibeta(df / 2, 0.5, x);
    return std::max(p, std::numeric_limits<double>::min());
}

Correlation pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw InputError("pearson: vectors differ in length");
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw InputError("pearson: need at least 3 observations");
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0;
    double syy = 0;
    double sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0) || !(syy > 0)) {
        throw InputError("zero variance");
    }
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    return {r, p_value(r, n), n};
}

PairedSample pairwise_complete(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y)
{
    if (x.size() != y.size()) {
        throw InputError("pairwise_complete: vectors differ in length");
    }
    PairedSample s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            s.index.push_back(i);
            s.x.push_back(*x[i]);
            s.y.push_back(*y[i]);
        }
    }
    return s;
}

std::vector<std::optional<double>> indicator_values(const MacroIndicators& macro, const RegionCatalog& source,
                                                    const RegionCatalog& target, Indicator indicator)
{
    std::vector<std::optional<double>> out(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (const auto id = source.find(target[i].code)) {
            out[i] = macro.value(*id, indicator);
        }
    }
    return out;
}

std::string_view fit_model_name(FitModel model)
{
    return model == FitModel::exponential ? "exponential" : "power";
}

FitModel parse_fit_model(std::string_view name)
{
    if (name == "exp" || name == "exponential") {
        return FitModel::exponential;
    }
    if (name == "power") {
        return FitModel::power;
    }
    throw InputError(fmt::format("unknown fit model '{}' (expected exp|power)", name));
}

double FitResult::expected(double xi) const
{
    return model == FitModel::exponential ? a * std::exp(b * xi) : a * std::pow(xi, b);
}

namespace {

std::string label_of(std::span<const std::string> labels, std::size_t i)
{
    return i < labels.size() ? labels[i] : fmt::format("#{}", i + 1);
}

void require_positive(std::span<const double> v, std::span<const std::string> labels, std::string_view what)
{
    std::vector<std::string> bad;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0) || !std::isfinite(v[i])) {
            bad.push_back(label_of(labels, i));
        }
    }
    if (!bad.empty()) {
        throw InputError(fmt::format("nonpositive {} for: {}", what, fmt::join(bad, ", ")));
    }
}

FitResult log_fit(FitModel model, std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    std::vector<double> u(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = model == FitModel::power ? std::log(x[i]) : x[i];
        v[i] = std::log(y[i]);
    }
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
    const double mv = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double suu = 0;
    double suv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += (u[i] - mu) * (u[i] - mu);
        suv += (u[i] - mu) * (v[i] - mv);
    }
    if (!(suu > 0)) {
        throw InputError("zero variance");
    }
    FitResult f;
    f.model = model;
    f.b = suv / suu;
    const double log_a = mv - f.b * mu;
    f.a = std::exp(log_a);
    f.x.assign(x.begin(), x.end());
    f.y.assign(y.begin(), y.end());
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        f.residuals.push_back(v[i] - (log_a + f.b * u[i]));
        sq += f.residuals.back() * f.residuals.back();
    }
    f.rmse_log = std::sqrt(sq / static_cast<double>(n));
    return f;
}

void check_fit_input(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw InputError("fit: vectors differ in length");
    }
    if (x.size() < 2) {
        throw InputError("fit: need at least 2 points");
    }
}

} // namespace

FitResult fit_exponential(std::span<const double> x, std::span<const double> y, std::span<const std::string> labels)
{
    check_fit_input(x, y);
    require_positive(y, labels, "y");
    return log_fit(FitModel::exponential, x, y);
}

FitResult fit_power(std::span<const double> x, std::span<const double> y, std::span<const std::string> labels)
{
    check_fit_input(x, y);
    require_positive(x, labels, "x");
    require_positive(y, labels, "y");
    return log_fit(FitModel::power, x, y);
}

FitResult fit(FitModel model, std::span<const double> x, std::span<const double> y,
              std::span<const std::string> labels)
{
    return model == FitModel::exponential ? fit_exponential(x, y, labels) : fit_power(x, y, labels);
}

std::vector<ResidualEntry> residual_ranking(const FitResult& fit, std::span<const std::string> labels)
{
    if (labels.size() != fit.residuals.size()) {
        throw InputError("residual_ranking: label count does not match the fit");
    }
    std::vector<ResidualEntry> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({labels[i], fit.residuals[i], i});
    }
    std::sort(out.begin(), out.end(), [](const ResidualEntry& a, const ResidualEntry& b) {
        if (a.residual != b.residual) {
            return a.residual < b.residual;
        }
        return a.label < b.label;
    });
    return out;
}

void write_fit_csv(std::ostream& out, const FitResult& fit, std::span<const std::string> labels)
{
    csv::write_row(out, {"label", "x", "y", "expected_y", "residual"});
    for (const auto& e : residual_ranking(fit, labels)) {
        const double x = fit.x[e.index];
        csv::write_row(out, {e.label, csv::format_double(x), csv::format_double(fit.y[e.index]),
                             csv::format_double(fit.expected(x)), csv::format_double(e.residual)});
    }
}

std::string_view quadrant_name(Quadrant q)
{
    switch (q) {
    case Quadrant::q1: return "Q1";
    case Quadrant::q2: return "Q2";
    case Quadrant::q3: return "Q3";
    case Quadrant::q4: return "Q4";
    }
    return "";
}

std::string_view quadrant_description(Quadrant q)
{
    switch (q) {
    case Quadrant::q1: return "diversified, ubiquitous";
    case Quadrant::q2: return "concentrated, ubiquitous";
    case Quadrant::q3: return "concentrated, specialized";
    case Quadrant::q4: return "diversified, specialized";
    }
    return "";
}

QuadrantClassification quadrants(const DegreeProfile& profile)
{
    QuadrantClassification c;
    c.mean_k_p0 = profile.mean_k_p0;
    c.mean_k_p1 = profile.mean_k_p1;
    const double eps0 = 1e-12 * std::max(1.0, std::abs(c.mean_k_p0));
    const double eps1 = 1e-12 * std::max(1.0, std::abs(c.mean_k_p1));
    for (Eigen::Index p = 0; p < profile.k_p0.size(); ++p) {
        const bool diversified = static_cast<double>(profile.k_p0(p)) - c.mean_k_p0 >= -eps0;
        const bool ubiquitous = profile.k_p1(p) - c.mean_k_p1 >= -eps1;
        if (diversified) {
            c.quadrant.push_back(ubiquitous ? Quadrant::q1 : Quadrant::q4);
        } else {
            c.quadrant.push_back(ubiquitous ? Quadrant::q2 : Quadrant::q3);
        }
    }
    return c;
}

void write_quadrants_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const DegreeProfile& profile,
                         const QuadrantClassification& q)
{
    csv::write_row(out, {"region_code", "k_p0", "k_p1", "quadrant", "description"});
    for (std::size_t p = 0; p < q.quadrant.size(); ++p) {
        const auto i = static_cast<Eigen::Index>(p);
        csv::write_row(out, {m.regions()[p].code, std::to_string(profile.k_p0(i)), csv::format_double(profile.k_p1(i)),
                             std::string(quadrant_name(q.quadrant[p])),
                             std::string(quadrant_description(q.quadrant[p]))});
    }
}

namespace {

struct Accumulator {
    std::size_t members = 0;
    double eci = 0;
    double gpp = 0;
    std::size_t gpp_n = 0;
    double income = 0;
    std::size_t income_n = 0;
};

RegionSummaryVariant summarize(std::string name, const std::vector<std::string>& order,
                               const std::map<std::string, Accumulator>& acc)
{
    RegionSummaryVariant v;
    v.name = std::move(name);
    for (const auto& group : order) {
        const auto it = acc.find(group);
        if (it == acc.end() || it->second.members == 0) {
            continue;
        }
        const auto& a = it->second;
        RegionGroup g;
        g.name = group;
        g.members = a.members;
        g.mean_eci = a.eci / static_cast<double>(a.members);
        if (a.gpp_n > 0) {
            g.mean_gpp_per_capita = a.gpp / static_cast<double>(a.gpp_n);
        }
        if (a.income_n > 0) {
            g.mean_income_per_person = a.income / static_cast<double>(a.income_n);
        }
        v.groups.push_back(std::move(g));
    }
    auto correlate = [&](auto field) -> std::optional<Correlation> {
        std::vector<double> x;
        std::vector<double> y;
        for (const auto& g : v.groups) {
            if (const auto& value = g.*field) {
                x.push_back(g.mean_eci);
                y.push_back(*value);
            }
        }
        if (x.size() < 3) {
            return std::nullopt;
        }
        try {
            return pearson(x, y);
        } catch (const InputError&) {
            return std::nullopt; // constant group means
        }
    };
    v.eci_vs_gpp_per_capita = correlate(&RegionGroup::mean_gpp_per_capita);
    v.eci_vs_income = correlate(&RegionGroup::mean_income_per_person);
    return v;
}

} // namespace

RegionSummary region_averages(std::span<const double> eci, std::span<const std::optional<double>> gpp_per_capita,
                              std::span<const std::optional<double>> income, const RegionCatalog& catalog,
                              std::string_view tokyo_code)
{
    if (eci.size() != catalog.size() || gpp_per_capita.size() != catalog.size() || income.size() != catalog.size()) {
        throw InputError("region_averages: inputs do not match the region catalog");
    }
    RegionSummary s;
    s.tokyo_code = tokyo_code;
    const std::string tokyo_group = "Tokyo";

    std::map<std::string, Accumulator> separate;
    std::map<std::string, Accumulator> with_tokyo;
    auto add = [&](Accumulator& a, std::size_t i) {
        ++a.members;
        a.eci += eci[i];
        if (gpp_per_capita[i]) {
            a.gpp += *gpp_per_capita[i];
            ++a.gpp_n;
        }
        if (income[i]) {
            a.income += *income[i];
            ++a.income_n;
        }
    };
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& r = catalog[i];
        if (r.super_region.empty()) {
            throw InputError(fmt::format("missing group mapping for region '{}'", r.code));
        }
        if (r.code == tokyo_code) {
            s.tokyo_present = true;
            add(separate[tokyo_group], i);
            add(with_tokyo[tokyo_group], i);
            add(with_tokyo[r.super_region], i);
        } else {
            add(separate[r.super_region], i);
            add(with_tokyo[r.super_region], i);
        }
    }
    std::vector<std::string> order(kSuperRegions.begin(), kSuperRegions.end());
    order.push_back(tokyo_group);
    s.tokyo_separate = summarize("tokyo_separate", order, separate);
    s.kanto_with_tokyo = summarize("kanto_with_tokyo", order, with_tokyo);
    return s;
}

void write_region_summary_csv(std::ostream& out, const RegionSummary& summary)
{
    csv::write_row(out, {"variant", "group", "members", "mean_eci", "mean_gpp_per_capita", "mean_income_per_person"});
    auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
    for (const auto* v : {&summary.tokyo_separate, &summary.kanto_with_tokyo}) {
        for (const auto& g : v->groups) {
            csv::write_row(out, {v->name, g.name, std::to_string(g.members), csv::format_double(g.mean_eci),
                                 opt(g.mean_gpp_per_capita), opt(g.mean_income_per_person)});
        }
    }
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InputError("kendall tau: need two equally long vectors with at least 2 entries");
    }
    long long concordant = 0;
    long long discordant = 0;
    long long tied_x = 0;
    long long tied_y = 0;
    long long pairs = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            ++pairs;
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0) {
                ++tied_x;
            }
            if (dy == 0) {
                ++tied_y;
            }
            if (dx == 0 || dy == 0) {
                continue;
            }
            ((dx > 0) == (dy > 0) ? concordant : discordant) += 1;
        }
    }
    const double denom =
        std::sqrt(static_cast<double>(pairs - tied_x)) * std::sqrt(static_cast<double>(pairs - tied_y));
    if (!(denom > 0)) {
        throw InputError("zero variance");
    }
    return static_cast<double>(concordant - discordant) / denom;
}

RankAgreement rank_agreement(const Ranking& a, const Ranking& b)
{
    if (a.labels.size() != a.scores.size() || b.labels.size() != b.scores.size()) {
        throw InputError("ranking labels and scores differ in length");
    }
    std::map<std::string, std::size_t> where_b;
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
        where_b.emplace(b.labels[i], i);
    }
    if (where_b.size() != a.labels.size() || b.labels.size() != a.labels.size()) {
        throw InputError("label mismatch between rankings");
    }
    std::vector<double> bs(a.labels.size());
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const auto it = where_b.find(a.labels[i]);
        if (it == where_b.end()) {
            throw InputError(fmt::format("label mismatch between rankings: '{}'", a.labels[i]));
        }
        bs[i] = b.scores[it->second];
    }

    RankAgreement out;
    out.kendall_tau = kendall_tau_b(a.scores, bs);
    const auto ra = ranks_descending(a.scores, a.labels);
    const auto rb = ranks_descending(bs, a.labels);
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        out.table.push_back({a.labels[i], ra[i], rb[i]});
    }
    std::sort(out.table.begin(), out.table.end(),
              [](const RankRow& x, const RankRow& y) { return x.rank_a < y.rank_a; });
    return out;
}

} // namespace ecx
