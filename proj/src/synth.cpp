#include "ecx/synth.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace ecx {

std::string_view shape_name(Shape shape)
{
    switch (shape) {
    case Shape::nested: return "nested";
    case Shape::modular: return "modular";
    case Shape::random: return "random";
    }
    return "";
}

Shape parse_shape(std::string_view name)
{
    if (name == "nested") {
        return Shape::nested;
    }
    if (name == "modular") {
        return Shape::modular;
    }
    if (name == "random") {
        return Shape::random;
    }
    throw InputError(fmt::format("invalid shape '{}' (expected nested|modular|random)", name));
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n)
{
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
}

namespace {

RegionCatalog generic_regions(std::size_t p)
{
    std::vector<Region> r;
    const int width = p < 100 ? 2 : static_cast<int>(std::to_string(p).size());
    for (std::size_t i = 0; i < p; ++i) {
        const auto block = i * kSuperRegions.size() / p;
        r.push_back({i, fmt::format("R{:0{}}", i + 1, width), fmt::format("Region {}", i + 1),
                     std::string(kSuperRegions[block])});
    }
    return RegionCatalog(std::move(r));
}

SectorCatalog generic_sectors(std::size_t s)
{
    std::vector<Sector> v;
    const int width = s < 100 ? 2 : static_cast<int>(std::to_string(s).size());
    for (std::size_t i = 0; i < s; ++i) {
        v.push_back({i, fmt::format("S{:0{}}", i + 1, width), fmt::format("Sector {}", i + 1),
                     fmt::format("Division {}", i * 4 / s + 1), false});
    }
    return SectorCatalog(std::move(v));
}

void patch_empty(BinaryMatrix& m, Rng& rng)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m.row(i).sum() == 0) {
            m(i, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m.cols())))) = 1;
        }
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m.col(j).sum() == 0) {
            m(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m.rows()))), j) = 1;
        }
    }
}

} // namespace

SyntheticData generate_synthetic(const SyntheticOptions& o)
{
    if (!(o.fill > 0 && o.fill <= 1)) {
        throw InputError("fill must lie in (0, 1]");
    }
    SyntheticData d;
    d.regions = o.regions ? *o.regions : generic_regions(o.p);
    d.sectors = o.sectors ? *o.sectors : generic_sectors(o.s);
    const SectorCatalog kept = d.sectors.kept();
    const auto P = static_cast<Eigen::Index>(d.regions.size());
    const auto S = static_cast<Eigen::Index>(kept.size());
    if (P < 2 || S < 2) {
        throw InputError("synthetic economy needs p >= 2 and s >= 2");
    }

    Rng rng(o.seed);
    d.support = BinaryMatrix::Zero(P, S);
    switch (o.shape) {
    case Shape::nested:
        for (Eigen::Index i = 0; i < P; ++i) {
            const double width = std::ceil(o.fill * static_cast<double>(P - i) * static_cast<double>(S) /
                                           static_cast<double>(P));
            const auto c = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(width), 1, S);
            d.support.row(i).head(c).setOnes();
        }
        break;
    case Shape::modular: {
        const Eigen::Index blocks = std::min<Eigen::Index>({P, S, 4});
        for (Eigen::Index i = 0; i < P; ++i) {
            for (Eigen::Index j = 0; j < S; ++j) {
                const bool same = i * blocks / P == j * blocks / S;
                d.support(i, j) = same && rng.uniform() < o.fill;
            }
        }
        patch_empty(d.support, rng);
        break;
    }
    case Shape::random:
        for (Eigen::Index i = 0; i < P; ++i) {
            for (Eigen::Index j = 0; j < S; ++j) {
                d.support(i, j) = rng.uniform() < o.fill;
            }
        }
        patch_empty(d.support, rng);
        break;
    }
    d.density = static_cast<double>(d.support.sum()) / static_cast<double>(P * S);

    std::size_t serial = 0;
    auto add_firm = [&](const std::string& region, const std::string& sector) {
        const double sales = std::round(std::exp(9.0 + 1.2 * rng.normal())) + 1.0;
        const auto employees = static_cast<std::int64_t>(1 + rng.below(300));
        d.firms.push_back({fmt::format("F{:06}", ++serial), region, sector, sales, employees});
    };
    for (Eigen::Index i = 0; i < P; ++i) {
        for (Eigen::Index j = 0; j < S; ++j) {
            if (!d.support(i, j)) {
                continue;
            }
            const auto count = 1 + rng.below(3);
            for (std::uint64_t k = 0; k < count; ++k) {
                add_firm(d.regions[static_cast<std::size_t>(i)].code, kept[static_cast<std::size_t>(j)].code);
            }
        }
    }
    // One firm per excluded sector so the exclusion path is exercised.
    for (const auto& sector : d.sectors.entries()) {
        if (sector.excluded) {
            add_firm(d.regions[rng.below(d.regions.size())].code, sector.code);
        }
    }

    d.macro.rows.resize(d.regions.size());
    for (std::size_t i = 0; i < d.regions.size(); ++i) {
        const double step = static_cast<double>(i);
        MacroRow row;
        row.population = std::round(500000 + 2000000 * rng.uniform());
        const double gpp = std::round(2500 + 100 * step + 99 * rng.uniform());
        row.gross_product = gpp * row.population;
        row.gpp_per_capita = gpp;
        row.income_per_person = std::round(2000 + 60 * step + 59 * rng.uniform());
        d.macro.rows[i] = row;
    }
    return d;
}

void write_firms_csv(std::ostream& out, std::span<const FirmRecord> firms)
{
    csv::write_row(out, {"firm_id", "region_code", "sector_code", "annual_sales", "employees"});
    for (const auto& f : firms) {
        csv::write_row(out, {f.firm_id, f.region_code, f.sector_code, csv::format_double(f.annual_sales),
                             std::to_string(f.employees)});
    }
}

} // namespace ecx
