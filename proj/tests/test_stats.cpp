#include "ecx/error.hpp"
#include "ecx/stats.hpp"
#include "helpers.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cfloat>
#include <cmath>
#include <random>
#include <sstream>

using namespace ecx;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

std::vector<std::string> labels(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(fmt::format("L{:02}", i));
    }
    return out;
}

bool within_factor(double value, double expected, double factor)
{
    return value <= expected * factor && value >= expected / factor;
}

// Ranking table of prefectures by ECI and by fitness, as published.
const std::vector<std::string> kEciOrder{
    "Tokyo", "Aichi", "Osaka", "Kanagawa", "Hyogo", "Fukuoka", "Saitama", "Kyoto", "Toyama", "Hiroshima",
    "Chiba", "Okinawa", "Shizuoka", "Okayama", "Ishikawa", "Fukui", "Kagawa", "Nara", "Ehime", "Yamaguchi",
    "Mie", "Gifu", "Oita", "Tochigi", "Shiga", "Ibaraki", "Wakayama", "Tokushima", "Hokkaido", "Fukushima",
    "Yamanashi", "Nagano", "Gunma", "Miyagi", "Niigata", "Shimane", "Yamagata", "Saga", "Tottori", "Nagasaki",
    "Aomori", "Kagoshima", "Kumamoto", "Miyazaki", "Akita", "Kochi", "Iwate"};
const std::vector<std::string> kFitnessOrder{
    "Tokyo", "Osaka", "Aichi", "Kanagawa", "Hyogo", "Chiba", "Ibaraki", "Saitama", "Fukuoka", "Okinawa",
    "Toyama", "Mie", "Kyoto", "Shizuoka", "Hokkaido", "Oita", "Okayama", "Gifu", "Ehime", "Hiroshima",
    "Kagawa", "Nara", "Tochigi", "Yamaguchi", "Tokushima", "Ishikawa", "Fukushima", "Wakayama", "Niigata", "Saga",
    "Shiga", "Kagoshima", "Yamanashi", "Aomori", "Fukui", "Shimane", "Tottori", "Yamagata", "Nagasaki", "Nagano",
    "Gunma", "Kumamoto", "Miyazaki", "Miyagi", "Akita", "Kochi", "Iwate"};

Ranking from_order(const std::vector<std::string>& order, const std::vector<std::string>& label_order)
{
    Ranking r;
    r.labels = label_order;
    for (const auto& l : label_order) {
        const auto pos = std::find(order.begin(), order.end(), l) - order.begin();
        r.scores.push_back(static_cast<double>(order.size()) - static_cast<double>(pos));
    }
    return r;
}

} // namespace

TEST_SUITE("stats")
{
    TEST_CASE("perfect linearity clamps p at the smallest normal double")
    {
        const auto x = linspace(0, 10, 20);
        std::vector<double> y;
        for (double v : x) {
            y.push_back(2 * v + 3);
        }
        const auto c = pearson(x, y);
        CHECK(c.r == doctest::Approx(1).epsilon(1e-15));
        CHECK(c.p_value == DBL_MIN);
        CHECK(c.n == 20);
        CHECK(c.df() == 18);
    }

    TEST_CASE("published (r, n, p) triples")
    {
        CHECK(within_factor(p_value(0.661, 47), 4.2e-7, 1.2));
        CHECK(std::abs(p_value(-0.230, 47) - 0.119) <= 0.005);
        CHECK(within_factor(p_value(0.742, 47), 2.3e-9, 1.5));
        CHECK(within_factor(p_value(0.979, 9), 4.27e-6, 1.5));
    }

    TEST_CASE("p-value matches numerical integration of the t density")
    {
        for (int df : {5, 45, 100}) {
            for (double r : {0.02, 0.1, 0.3, -0.45, 0.6, 0.8}) {
                const auto n = static_cast<std::size_t>(df + 2);
                const double expected = oracle::t_test_p_value(r, df + 2);
                CHECK(std::abs(p_value(r, n) - expected) <= 1e-9 * expected);
            }
        }
    }

    TEST_CASE("pearson errors")
    {
        const std::vector<double> a{1, 2, 3};
        const std::vector<double> flat{4, 4, 4};
        CHECK_THROWS_WITH_AS(pearson(a, flat), doctest::Contains("zero variance"), InputError);
        CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}), InputError);
        CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), InputError);
    }

    TEST_CASE("pearson under affine rescaling")
    {
        std::mt19937_64 rng(31);
        std::normal_distribution<double> g;
        std::vector<double> x(30);
        std::vector<double> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            x[i] = g(rng);
            y[i] = 0.4 * x[i] + g(rng);
        }
        const double r = pearson(x, y).r;
        std::vector<double> xs;
        std::vector<double> neg;
        for (double v : x) {
            xs.push_back(7.5 * v - 100);
            neg.push_back(-2 * v + 1);
        }
        CHECK(std::abs(pearson(xs, y).r - r) < 1e-12);
        CHECK(std::abs(pearson(neg, y).r + r) < 1e-12);
    }

    TEST_CASE("pairwise-complete samples")
    {
        const std::vector<std::optional<double>> x{1.0, std::nullopt, 3.0, 4.0};
        const std::vector<std::optional<double>> y{2.0, 5.0, std::nullopt, 8.0};
        const auto s = pairwise_complete(x, y);
        CHECK(s.index == std::vector<std::size_t>{0, 3});
        CHECK(s.x == std::vector<double>{1.0, 4.0});
        CHECK(s.y == std::vector<double>{2.0, 8.0});
    }

    TEST_CASE("exact exponential and power recovery")
    {
        const auto x = linspace(-1, 4, 25);
        std::vector<double> ye;
        for (double v : x) {
            ye.push_back(2 * std::exp(0.5 * v));
        }
        const auto e = fit_exponential(x, ye);
        CHECK(std::abs(e.a - 2) < 1e-10);
        CHECK(std::abs(e.b - 0.5) < 1e-10);
        CHECK(e.rmse_log < 1e-12);

        const auto xp = linspace(0.5, 9, 25);
        std::vector<double> yp;
        for (double v : xp) {
            yp.push_back(3 * v * v);
        }
        const auto p = fit_power(xp, yp);
        CHECK(std::abs(p.a - 3) < 1e-10);
        CHECK(std::abs(p.b - 2) < 1e-10);
        CHECK(p.expected(2.0) == doctest::Approx(12));

        const std::vector<double> flat(x.size(), 7.25);
        const auto c = fit_exponential(x, flat);
        CHECK(std::abs(c.b) < 1e-12);
        CHECK(c.a == doctest::Approx(7.25).epsilon(1e-12));
    }

    TEST_CASE("noisy fits match the closed-form regression")
    {
        std::mt19937_64 rng(41);
        std::normal_distribution<double> g(0, 0.3);
        std::uniform_real_distribution<double> u(1, 10);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(40);
            std::vector<double> y(40);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] = u(rng);
                y[i] = 1.7 * std::pow(x[i], 0.8) * std::exp(g(rng));
            }
            std::vector<double> lx;
            std::vector<double> ly;
            for (std::size_t i = 0; i < x.size(); ++i) {
                lx.push_back(std::log(x[i]));
                ly.push_back(std::log(y[i]));
            }
            const auto exp_line = oracle::regression(x, ly);
            const auto e = fit(FitModel::exponential, x, y);
            CHECK(std::abs(std::log(e.a) - exp_line.intercept) < 1e-10);
            CHECK(std::abs(e.b - exp_line.slope) < 1e-10);

            const auto pow_line = oracle::regression(lx, ly);
            const auto p = fit(FitModel::power, x, y);
            CHECK(std::abs(std::log(p.a) - pow_line.intercept) < 1e-10);
            CHECK(std::abs(p.b - pow_line.slope) < 1e-10);

            double se = 0;
            double sp = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                se += e.residuals[i];
                sp += p.residuals[i];
            }
            CHECK(std::abs(se) < 1e-10);
            CHECK(std::abs(sp) < 1e-10);
        }
    }

    TEST_CASE("fit errors name the offending labels")
    {
        const std::vector<double> x{1, 2, 3, 4};
        const std::vector<double> y{1, -2, 0, 4};
        const std::vector<std::string> l{"A", "B", "C", "D"};
        CHECK_THROWS_WITH_AS(fit_exponential(x, y, l), doctest::Contains("B, C"), InputError);
        CHECK_THROWS_AS(fit_power(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 3}), InputError);
        CHECK_THROWS_WITH_AS(fit_power(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
                             doctest::Contains("zero variance"), InputError);
        CHECK(parse_fit_model("exp") == FitModel::exponential);
        CHECK(parse_fit_model("power") == FitModel::power);
        CHECK_THROWS_AS(parse_fit_model("linear"), InputError);
    }

    TEST_CASE("residual ranking")
    {
        const auto x = linspace(1, 10, 12);
        std::vector<double> y;
        for (double v : x) {
            y.push_back(5 * std::exp(0.2 * v));
        }
        const auto names = labels(x.size());
        const auto on_line = residual_ranking(fit_exponential(x, y), names);
        for (const auto& entry : on_line) {
            CHECK(std::abs(entry.residual) < 1e-12);
        }

        y[7] *= 0.5;
        const auto f = fit_exponential(x, y);
        const auto ranking = residual_ranking(f, names);
        CHECK(ranking.front().label == "L07");
        CHECK(ranking.front().residual < 0);

        std::vector<double> scaled;
        for (double v : y) {
            scaled.push_back(v * 13.0);
        }
        const auto again = residual_ranking(fit_exponential(x, scaled), names);
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            CHECK(again[i].label == ranking[i].label);
        }

        std::ostringstream out;
        write_fit_csv(out, f, names);
        CHECK(out.str().rfind("label,x,y,expected_y,residual\nL07,", 0) == 0);
    }

    TEST_CASE("quadrants of the nested 3x3")
    {
        const auto m = testing::matrix({{1, 1, 1}, {1, 1, 0}, {1, 0, 0}});
        const auto q = quadrants(degree_profile(m));
        CHECK(q.mean_k_p0 == doctest::Approx(2));
        CHECK(q.mean_k_p1 == doctest::Approx(2.5));
        CHECK(q.quadrant[0] == Quadrant::q4);
        CHECK(quadrant_description(q.quadrant[0]) == "diversified, specialized");
        CHECK(q.quadrant[2] == Quadrant::q2);
        CHECK(quadrant_description(q.quadrant[2]) == "concentrated, ubiquitous");
        CHECK(q.quadrant[1] == Quadrant::q1);

        std::ostringstream out;
        write_quadrants_csv(out, m, degree_profile(m), q);
        CHECK(out.str().rfind("region_code,k_p0,k_p1,quadrant,description\n", 0) == 0);
    }

    TEST_CASE("identical regions share a quadrant")
    {
        const auto m = testing::matrix({{1, 0, 1}, {1, 0, 1}, {1, 0, 1}, {0, 1, 0}, {0, 1, 0}, {0, 1, 0}});
        const auto q = quadrants(degree_profile(m));
        CHECK(q.quadrant[0] == q.quadrant[1]);
        CHECK(q.quadrant[1] == q.quadrant[2]);
        CHECK(q.quadrant[3] == q.quadrant[5]);
    }

    TEST_CASE("quadrants are permutation invariant")
    {
        std::mt19937_64 rng(17);
        const auto m = testing::matrix(oracle::random_binary(rng, 15, 20, 0.35));
        std::vector<std::size_t> rp(15);
        std::vector<std::size_t> cp(20);
        std::iota(rp.begin(), rp.end(), std::size_t{0});
        std::iota(cp.begin(), cp.end(), std::size_t{0});
        std::shuffle(rp.begin(), rp.end(), rng);
        std::shuffle(cp.begin(), cp.end(), rng);
        const auto base = quadrants(degree_profile(m));
        const auto perm = quadrants(degree_profile(m.permuted(rp, cp)));
        for (std::size_t i = 0; i < rp.size(); ++i) {
            CHECK(perm.quadrant[i] == base.quadrant[rp[i]]);
        }
    }

    TEST_CASE("region averages")
    {
        std::vector<Region> r{{0, "HK", "Hokkaido", "Hokkaido"},
                              {1, "SA", "Saitama", "Kanto"},
                              {2, "TK", "Tokyo", "Kanto"},
                              {3, "KN", "Kanagawa", "Kanto"},
                              {4, "OS", "Osaka", "Kansai"}};
        const RegionCatalog catalog(r);
        const std::vector<double> eci{-1.0, 0.5, 2.0, 1.5, 1.0};
        const std::vector<std::optional<double>> gpp{3.0, 4.0, 9.0, std::nullopt, 5.0};
        const std::vector<std::optional<double>> income{2.0, 2.5, 6.0, 3.5, 3.0};
        const auto s = region_averages(eci, gpp, income, catalog);
        CHECK(s.tokyo_present);
        CHECK(s.primary == "tokyo_separate");

        const auto& sep = s.tokyo_separate.groups;
        REQUIRE(sep.size() == 4);
        CHECK(sep[0].name == "Hokkaido");
        CHECK(sep[1].name == "Kanto");
        CHECK(sep[1].members == 2);
        CHECK(sep[1].mean_eci == 1.0);
        CHECK(*sep[1].mean_gpp_per_capita == 4.0);
        CHECK(*sep[1].mean_income_per_person == 3.0);
        CHECK(sep[3].name == "Tokyo");
        CHECK(sep[3].mean_eci == 2.0);

        const auto& with = s.kanto_with_tokyo.groups;
        REQUIRE(with.size() == 4);
        CHECK(with[1].members == 3);
        CHECK(with[1].mean_eci == doctest::Approx(4.0 / 3));
        CHECK(*with[1].mean_gpp_per_capita == 6.5);
        CHECK(s.tokyo_separate.eci_vs_gpp_per_capita.has_value());
        CHECK(s.tokyo_separate.eci_vs_gpp_per_capita->n == 4);

        std::ostringstream out;
        write_region_summary_csv(out, s);
        CHECK(out.str().find("tokyo_separate,Kanto,2,1,4,3\n") != std::string::npos);
    }

    TEST_CASE("single-region catalog reproduces the prefecture value")
    {
        const RegionCatalog catalog(std::vector<Region>{{0, "EH", "Ehime", "Shikoku"}});
        const std::vector<double> eci{0.75};
        const std::vector<std::optional<double>> gpp{3100.0};
        const std::vector<std::optional<double>> income{std::nullopt};
        const auto s = region_averages(eci, gpp, income, catalog);
        REQUIRE(s.tokyo_separate.groups.size() == 1);
        CHECK(s.tokyo_separate.groups[0].mean_eci == 0.75);
        CHECK(*s.tokyo_separate.groups[0].mean_gpp_per_capita == 3100.0);
        CHECK_FALSE(s.tokyo_separate.groups[0].mean_income_per_person.has_value());
        CHECK_FALSE(s.tokyo_separate.eci_vs_gpp_per_capita.has_value());
        CHECK_FALSE(s.tokyo_present);
    }

    TEST_CASE("missing group mapping is an error")
    {
        const auto catalog = RegionCatalog::with_default_labels(3);
        const std::vector<double> eci{0, 1, 2};
        const std::vector<std::optional<double>> none(3);
        CHECK_THROWS_WITH_AS(region_averages(eci, none, none, catalog), doctest::Contains("'R01'"), InputError);
    }

    TEST_CASE("Kendall tau-b")
    {
        const std::vector<double> a{1, 2, 3, 4, 5};
        const std::vector<double> rev{5, 4, 3, 2, 1};
        CHECK(kendall_tau_b(a, a) == doctest::Approx(1).epsilon(1e-15));
        CHECK(kendall_tau_b(a, rev) == doctest::Approx(-1).epsilon(1e-15));
        // Ties: 10 pairs, x ties 1, y ties 1, C = 8, D = 0.
        const std::vector<double> tx{1, 1, 2, 3, 4};
        const std::vector<double> ty{1, 2, 3, 3, 4};
        CHECK(kendall_tau_b(tx, ty) == doctest::Approx(8.0 / 9).epsilon(1e-15));
    }

    TEST_CASE("published ECI and fitness rankings agree at the extremes")
    {
        auto sorted = kEciOrder;
        std::sort(sorted.begin(), sorted.end());
        const auto agreement = rank_agreement(from_order(kEciOrder, sorted), from_order(kFitnessOrder, sorted));
        auto row = [&](const std::string& name) {
            return *std::find_if(agreement.table.begin(), agreement.table.end(),
                                 [&](const RankRow& r) { return r.label == name; });
        };
        CHECK(row("Tokyo").rank_a == 1);
        CHECK(row("Tokyo").rank_b == 1);
        CHECK(row("Kochi").rank_a == 46);
        CHECK(row("Kochi").rank_b == 46);
        CHECK(row("Iwate").rank_a == 47);
        CHECK(row("Iwate").rank_b == 47);
        CHECK(agreement.table.front().label == "Tokyo");

        // Independent pair count (no ties in either column).
        long long concordant = 0;
        long long discordant = 0;
        for (std::size_t i = 0; i < kEciOrder.size(); ++i) {
            for (std::size_t j = i + 1; j < kEciOrder.size(); ++j) {
                const auto fi = std::find(kFitnessOrder.begin(), kFitnessOrder.end(), kEciOrder[i]);
                const auto fj = std::find(kFitnessOrder.begin(), kFitnessOrder.end(), kEciOrder[j]);
                (fi < fj ? concordant : discordant) += 1;
            }
        }
        const double expected = static_cast<double>(concordant - discordant) / static_cast<double>(concordant + discordant);
        CHECK(agreement.kendall_tau == doctest::Approx(expected).epsilon(1e-14));
        CHECK(agreement.kendall_tau > 0.7);
    }

    TEST_CASE("rank agreement rejects different label sets")
    {
        Ranking a{{"A", "B"}, {1, 2}};
        Ranking b{{"A", "C"}, {1, 2}};
        CHECK_THROWS_AS(rank_agreement(a, b), InputError);
    }

    TEST_CASE("indicator values follow region codes")
    {
        const auto source = testing::regions({"AA", "BB", "CC"});
        const auto target = testing::regions({"CC", "AA"});
        MacroIndicators macro;
        macro.rows.resize(3);
        macro.rows[0] = MacroRow{100, 1000, 7, 10};
        macro.rows[2] = MacroRow{100, 3000, 9, 30};
        const auto v = indicator_values(macro, source, target, Indicator::gpp_per_capita);
        REQUIRE(v.size() == 2);
        CHECK(*v[0] == 30);
        CHECK(*v[1] == 10);
        const auto inc = indicator_values(macro, source, target, Indicator::income_per_person);
        CHECK(*inc[0] == 9);
    }
}
