#include "ecx/ingest.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

namespace ecx {

bool is_super_region(std::string_view name)
{
    return std::find(kSuperRegions.begin(), kSuperRegions.end(), name) != kSuperRegions.end();
}

namespace {

template <typename Entry>
std::unordered_map<std::string, std::size_t> build_index(std::vector<Entry>& entries, std::string_view what)
{
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].id = i;
        if (entries[i].code.empty()) {
            throw InputError(fmt::format("{} catalog: empty code at position {}", what, i));
        }
        if (!index.emplace(entries[i].code, i).second) {
            throw InputError(fmt::format("{} catalog: duplicate code '{}'", what, entries[i].code));
        }
    }
    return index;
}

std::string padded_code(char prefix, std::size_t i, std::size_t n)
{
    const auto width = std::max<std::size_t>(2, std::to_string(n).size());
    return fmt::format("{}{:0{}}", prefix, i + 1, width);
}

} // namespace

RegionCatalog::RegionCatalog(std::vector<Region> entries) : entries_(std::move(entries))
{
    index_ = build_index(entries_, "region");
    for (const auto& r : entries_) {
        if (!r.super_region.empty() && !is_super_region(r.super_region)) {
            throw InputError(fmt::format("region '{}': unknown super region '{}'", r.code, r.super_region));
        }
    }
}

std::optional<std::size_t> RegionCatalog::find(std::string_view code) const
{
    auto it = index_.find(std::string(code));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> RegionCatalog::codes() const
{
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& r : entries_) {
        out.push_back(r.code);
    }
    return out;
}

RegionCatalog RegionCatalog::subset(std::span<const std::size_t> keep) const
{
    std::vector<Region> out;
    out.reserve(keep.size());
    for (auto i : keep) {
        out.push_back(entries_.at(i));
    }
    return RegionCatalog(std::move(out));
}

RegionCatalog RegionCatalog::with_default_labels(std::size_t n)
{
    std::vector<Region> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].code = padded_code('R', i, n);
        out[i].name = out[i].code;
    }
    return RegionCatalog(std::move(out));
}

bool RegionCatalog::operator==(const RegionCatalog& other) const
{
    if (size() != other.size()) {
        return false;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = other.entries_[i];
        if (a.code != b.code || a.name != b.name || a.super_region != b.super_region) {
            return false;
        }
    }
    return true;
}

SectorCatalog::SectorCatalog(std::vector<Sector> entries) : entries_(std::move(entries))
{
    index_ = build_index(entries_, "sector");
}

std::optional<std::size_t> SectorCatalog::find(std::string_view code) const
{
    auto it = index_.find(std::string(code));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> SectorCatalog::codes() const
{
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& s : entries_) {
        out.push_back(s.code);
    }
    return out;
}

SectorCatalog SectorCatalog::subset(std::span<const std::size_t> keep) const
{
    std::vector<Sector> out;
    out.reserve(keep.size());
    for (auto i : keep) {
        out.push_back(entries_.at(i));
    }
    return SectorCatalog(std::move(out));
}

SectorCatalog SectorCatalog::kept() const
{
    std::vector<Sector> out;
    for (const auto& s : entries_) {
        if (!s.excluded) {
            out.push_back(s);
        }
    }
    return SectorCatalog(std::move(out));
}

std::size_t SectorCatalog::excluded_count() const
{
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const Sector& s) { return s.excluded; }));
}

SectorCatalog SectorCatalog::with_default_labels(std::size_t n)
{
    std::vector<Sector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].code = padded_code('S', i, n);
        out[i].name = out[i].code;
    }
    return SectorCatalog(std::move(out));
}

bool SectorCatalog::operator==(const SectorCatalog& other) const
{
    if (size() != other.size()) {
        return false;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = other.entries_[i];
        if (a.code != b.code || a.name != b.name || a.division != b.division || a.excluded != b.excluded) {
            return false;
        }
    }
    return true;
}

RegionCatalog read_regions(std::istream& in)
{
    if (!in) {
        throw IoError("regions: unreadable stream");
    }
    csv::Reader reader(in);
    csv::read_header(reader, {"code", "name", "super_region"}, "regions.csv");
    std::vector<Region> entries;
    csv::Row row;
    while (reader.next(row)) {
        if (row.size() == 1 && csv::trim(row[0]).empty()) {
            continue;
        }
        if (row.size() != 3) {
            throw InputError(fmt::format("regions.csv line {}: expected 3 fields", reader.line()));
        }
        Region r;
        r.code = csv::trim(row[0]);
        r.name = csv::trim(row[1]);
        r.super_region = csv::trim(row[2]);
        if (!is_super_region(r.super_region)) {
            throw InputError(
                fmt::format("regions.csv line {}: unknown super region '{}'", reader.line(), r.super_region));
        }
        entries.push_back(std::move(r));
    }
    return RegionCatalog(std::move(entries));
}

void write_regions(std::ostream& out, const RegionCatalog& catalog)
{
    csv::write_row(out, {"code", "name", "super_region"});
    for (const auto& r : catalog.entries()) {
        csv::write_row(out, {r.code, r.name, r.super_region});
    }
}

SectorCatalog read_sectors(std::istream& in)
{
    if (!in) {
        throw IoError("sectors: unreadable stream");
    }
    csv::Reader reader(in);
    csv::read_header(reader, {"code", "name", "division", "excluded"}, "sectors.csv");
    std::vector<Sector> entries;
    csv::Row row;
    while (reader.next(row)) {
        if (row.size() == 1 && csv::trim(row[0]).empty()) {
            continue;
        }
        if (row.size() != 4) {
            throw InputError(fmt::format("sectors.csv line {}: expected 4 fields", reader.line()));
        }
        Sector s;
        s.code = csv::trim(row[0]);
        s.name = csv::trim(row[1]);
        s.division = csv::trim(row[2]);
        const auto flag = csv::trim(row[3]);
        if (flag != "0" && flag != "1") {
            throw InputError(fmt::format("sectors.csv line {}: excluded must be 0 or 1", reader.line()));
        }
        s.excluded = flag == "1";
        entries.push_back(std::move(s));
    }
    return SectorCatalog(std::move(entries));
}

void write_sectors(std::ostream& out, const SectorCatalog& catalog)
{
    csv::write_row(out, {"code", "name", "division", "excluded"});
    for (const auto& s : catalog.entries()) {
        csv::write_row(out, {s.code, s.name, s.division, s.excluded ? "1" : "0"});
    }
}

FirmParseResult parse_firms(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors)
{
    if (!in) {
        throw IoError("firms: unreadable stream");
    }
    csv::Reader reader(in);
    csv::read_header(reader, {"firm_id", "region_code", "sector_code", "annual_sales", "employees"}, "firms.csv");

    FirmParseResult result;
    csv::Row row;
    auto reject = [&](std::string reason) { result.rejections.push_back({reader.line(), std::move(reason)}); };
    while (reader.next(row)) {
        if (row.size() == 1 && csv::trim(row[0]).empty()) {
            continue;
        }
        if (row.size() != 5) {
            reject(fmt::format("expected 5 fields, found {}", row.size()));
            continue;
        }
        const auto region = csv::trim(row[1]);
        const auto sector = csv::trim(row[2]);
        const auto sales_text = csv::trim(row[3]);
        const auto employees_text = csv::trim(row[4]);
        if (sales_text.empty()) {
            reject("missing sales");
            continue;
        }
        if (employees_text.empty()) {
            reject("missing employees");
            continue;
        }
        const auto sales = csv::parse_double(sales_text);
        if (!sales) {
            reject("malformed sales");
            continue;
        }
        if (*sales < 0) {
            reject("negative sales");
            continue;
        }
        const auto employees = csv::parse_int(employees_text);
        if (!employees || *employees < 0) {
            reject("malformed employees");
            continue;
        }
        if (!regions.find(region)) {
            reject(fmt::format("unknown region '{}'", region));
            continue;
        }
        if (!sectors.find(sector)) {
            reject(fmt::format("unknown sector '{}'", sector));
            continue;
        }
        if (*sales == 0) {
            ++result.zero_sales;
        }
        result.records.push_back(
            {std::string(csv::trim(row[0])), std::string(region), std::string(sector), *sales, *employees});
    }
    return result;
}

double SalesMatrix::total() const
{
    double sum = 0;
    for (Eigen::Index p = 0; p < values.rows(); ++p) {
        for (Eigen::Index s = 0; s < values.cols(); ++s) {
            sum += values(p, s);
        }
    }
    return sum;
}

SalesMatrix aggregate_sales(std::span<const FirmRecord> records, const RegionCatalog& regions,
                            const SectorCatalog& sectors)
{
    if (records.empty()) {
        throw InputError("no data");
    }
    const auto kept = sectors.kept();

    struct Keyed {
        std::size_t region;
        std::size_t sector;
        const FirmRecord* record;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(records.size());
    for (const auto& r : records) {
        const auto p = regions.find(r.region_code);
        const auto s = sectors.find(r.sector_code);
        if (!p || !s) {
            throw InputError(fmt::format("firm '{}': code not in catalog", r.firm_id));
        }
        if (sectors[*s].excluded) {
            continue;
        }
        keyed.push_back({*p, *kept.find(r.sector_code), &r});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.region != b.region) {
            return a.region < b.region;
        }
        if (a.sector != b.sector) {
            return a.sector < b.sector;
        }
        if (a.record->annual_sales != b.record->annual_sales) {
            return a.record->annual_sales < b.record->annual_sales;
        }
        return a.record->firm_id < b.record->firm_id;
    });

    SalesMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(regions.size()),
                                          static_cast<Eigen::Index>(kept.size())),
                    regions, kept};
    for (const auto& k : keyed) {
        out.values(static_cast<Eigen::Index>(k.region), static_cast<Eigen::Index>(k.sector)) +=
            k.record->annual_sales;
    }
    return out;
}

void write_sales_csv(std::ostream& out, const SalesMatrix& sales)
{
    csv::Row header{"region_code"};
    for (const auto& code : sales.sectors.codes()) {
        header.push_back(code);
    }
    csv::write_row(out, header);
    for (Eigen::Index p = 0; p < sales.values.rows(); ++p) {
        csv::Row row{sales.regions[static_cast<std::size_t>(p)].code};
        for (Eigen::Index s = 0; s < sales.values.cols(); ++s) {
            row.push_back(csv::format_double(sales.values(p, s)));
        }
        csv::write_row(out, row);
    }
}

SalesMatrix read_sales_csv(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors)
{
    if (!in) {
        throw IoError("sales: unreadable stream");
    }
    csv::Reader reader(in);
    std::vector<std::string_view> header{"region_code"};
    const auto codes = sectors.codes();
    for (const auto& c : codes) {
        header.push_back(c);
    }
    csv::read_header(reader, header, "sales.csv");

    SalesMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(regions.size()),
                                          static_cast<Eigen::Index>(sectors.size())),
                    regions, sectors};
    std::vector<bool> seen(regions.size(), false);
    csv::Row row;
    while (reader.next(row)) {
        if (row.size() != codes.size() + 1) {
            throw InputError(fmt::format("sales.csv line {}: wrong field count", reader.line()));
        }
        const auto p = regions.find(csv::trim(row[0]));
        if (!p || seen[*p]) {
            throw InputError(fmt::format("sales.csv line {}: unknown or repeated region '{}'", reader.line(), row[0]));
        }
        seen[*p] = true;
        for (std::size_t s = 0; s < codes.size(); ++s) {
            const auto v = csv::parse_double(row[s + 1]);
            if (!v || *v < 0) {
                throw InputError(fmt::format("sales.csv line {}: bad value for sector {}", reader.line(), codes[s]));
            }
            out.values(static_cast<Eigen::Index>(*p), static_cast<Eigen::Index>(s)) = *v;
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw InputError("sales.csv: missing region rows");
    }
    return out;
}

std::string_view indicator_name(Indicator indicator)
{
    switch (indicator) {
    case Indicator::gpp_per_capita:
        return "gpp_per_capita";
    case Indicator::income_per_person:
        return "income";
    }
    return "?";
}

Indicator parse_indicator(std::string_view name)
{
    if (name == "gpp_per_capita" || name == "gpp") {
        return Indicator::gpp_per_capita;
    }
    if (name == "income" || name == "income_per_person") {
        return Indicator::income_per_person;
    }
    throw InputError(fmt::format("unknown indicator '{}'", name));
}

std::optional<double> MacroIndicators::value(std::size_t region, Indicator indicator) const
{
    if (region >= rows.size() || !rows[region]) {
        return std::nullopt;
    }
    switch (indicator) {
    case Indicator::gpp_per_capita:
        return rows[region]->gpp_per_capita;
    case Indicator::income_per_person:
        return rows[region]->income_per_person;
    }
    return std::nullopt;
}

std::size_t MacroIndicators::present() const
{
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); }));
}

MacroIndicators parse_macro(std::istream& in, const RegionCatalog& regions)
{
    if (!in) {
        throw IoError("macro: unreadable stream");
    }
    csv::Reader reader(in);
    csv::read_header(reader, {"region_code", "population", "gross_product", "income_per_person"}, "macro.csv");
    MacroIndicators out;
    out.rows.resize(regions.size());
    csv::Row row;
    auto reject = [&](std::string reason) { out.rejections.push_back({reader.line(), std::move(reason)}); };
    while (reader.next(row)) {
        if (row.size() == 1 && csv::trim(row[0]).empty()) {
            continue;
        }
        if (row.size() != 4) {
            reject(fmt::format("expected 4 fields, found {}", row.size()));
            continue;
        }
        const auto code = csv::trim(row[0]);
        const auto p = regions.find(code);
        if (!p) {
            reject(fmt::format("unknown region '{}'", code));
            continue;
        }
        if (out.rows[*p]) {
            throw InputError(fmt::format("macro.csv line {}: duplicate region '{}'", reader.line(), code));
        }
        const auto population = csv::parse_double(row[1]);
        const auto gross = csv::parse_double(row[2]);
        const auto income = csv::parse_double(row[3]);
        if (!population || !gross || !income) {
            reject("malformed number");
            continue;
        }
        if (*population <= 0) {
            reject("population must be positive");
            continue;
        }
        out.rows[*p] = MacroRow{*population, *gross, *income, *gross / *population};
    }
    return out;
}

void write_macro(std::ostream& out, const MacroIndicators& macro, const RegionCatalog& regions)
{
    csv::write_row(out, {"region_code", "population", "gross_product", "income_per_person"});
    for (std::size_t p = 0; p < regions.size() && p < macro.rows.size(); ++p) {
        if (const auto& r = macro.rows[p]) {
            csv::write_row(out, {regions[p].code, csv::format_double(r->population),
                                 csv::format_double(r->gross_product), csv::format_double(r->income_per_person)});
        }
    }
}

} // namespace ecx
