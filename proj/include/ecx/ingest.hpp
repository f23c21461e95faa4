#pragma once

// Ingestion: region/sector catalogs, firm records, sales aggregation and
// macroeconomic indicator tables.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ecx {

// The eight regions of Japan used to group prefectures.
inline constexpr std::array<std::string_view, 8> kSuperRegions = {
    "Hokkaido", "Tohoku", "Kanto", "Chubu", "Kansai", "Chugoku", "Shikoku", "Kyushu"};

bool is_super_region(std::string_view name);

struct Region {
    std::size_t id = 0;
    std::string code;
    std::string name;
    std::string super_region; // empty when unassigned
};

class RegionCatalog {
public:
    RegionCatalog() = default;
    // Assigns dense ids in the given order. Throws InputError on duplicate codes
    // or a super_region outside kSuperRegions.
    explicit RegionCatalog(std::vector<Region> entries);

    std::size_t size() const { return entries_.size(); }
    const Region& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<Region>& entries() const { return entries_; }
    std::optional<std::size_t> find(std::string_view code) const;
    std::vector<std::string> codes() const;

    // Catalog of the listed entries, re-indexed densely in the given order.
    RegionCatalog subset(std::span<const std::size_t> keep) const;

    // Generated codes R01..Rn, no names or super regions.
    static RegionCatalog with_default_labels(std::size_t n);

    bool operator==(const RegionCatalog& other) const;

private:
    std::vector<Region> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Sector {
    std::size_t id = 0;
    std::string code;
    std::string name;
    std::string division;
    bool excluded = false;
};

class SectorCatalog {
public:
    SectorCatalog() = default;
    explicit SectorCatalog(std::vector<Sector> entries);

    std::size_t size() const { return entries_.size(); }
    const Sector& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<Sector>& entries() const { return entries_; }
    std::optional<std::size_t> find(std::string_view code) const;
    std::vector<std::string> codes() const;

    SectorCatalog subset(std::span<const std::size_t> keep) const;
    // Catalog with excluded sectors removed.
    SectorCatalog kept() const;
    std::size_t excluded_count() const;

    static SectorCatalog with_default_labels(std::size_t n);

    bool operator==(const SectorCatalog& other) const;

private:
    std::vector<Sector> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// regions.csv: code,name,super_region
RegionCatalog read_regions(std::istream& in);
void write_regions(std::ostream& out, const RegionCatalog& catalog);
// sectors.csv: code,name,division,excluded (0|1)
SectorCatalog read_sectors(std::istream& in);
void write_sectors(std::ostream& out, const SectorCatalog& catalog);

struct FirmRecord {
    std::string firm_id;
    std::string region_code;
    std::string sector_code;
    double annual_sales = 0;
    std::int64_t employees = 0;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

struct FirmParseResult {
    std::vector<FirmRecord> records;
    std::vector<Rejection> rejections;
    std::size_t zero_sales = 0; // accepted firms that reported exactly zero sales
};

// Parses firms.csv (firm_id,region_code,sector_code,annual_sales,employees).
// Malformed rows are rejected with a reason; a bad header or unreadable stream throws.
// Rows in excluded sectors are accepted here and dropped by aggregate_sales.
FirmParseResult parse_firms(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors);

// Weighted region x sector matrix w_ps of aggregated annual sales.
struct SalesMatrix {
    Eigen::MatrixXd values;
    RegionCatalog regions;
    SectorCatalog sectors; // excluded sectors already removed

    double total() const;
};

// Sums annual sales per (region, sector). Records are summed in sorted key order
// so the result does not depend on input order. Excluded sectors contribute nothing.
SalesMatrix aggregate_sales(std::span<const FirmRecord> records, const RegionCatalog& regions,
                            const SectorCatalog& sectors);

// Canonical CSV: header "region_code,<sector codes...>", one row per region.
void write_sales_csv(std::ostream& out, const SalesMatrix& sales);
SalesMatrix read_sales_csv(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors);

enum class Indicator { gpp_per_capita, income_per_person };

std::string_view indicator_name(Indicator indicator);
Indicator parse_indicator(std::string_view name);

struct MacroRow {
    double population = 0;
    double gross_product = 0;
    double income_per_person = 0;
    double gpp_per_capita = 0;
};

// Indicator rows indexed by region id; regions absent from the table are nullopt.
struct MacroIndicators {
    std::vector<std::optional<MacroRow>> rows;
    std::vector<Rejection> rejections;

    std::optional<double> value(std::size_t region, Indicator indicator) const;
    std::size_t present() const;
};

// Parses macro.csv (region_code,population,gross_product,income_per_person).
// Rows with population <= 0, unknown regions or bad numbers are rejected;
// a duplicate region is fatal.
MacroIndicators parse_macro(std::istream& in, const RegionCatalog& regions);
void write_macro(std::ostream& out, const MacroIndicators& macro, const RegionCatalog& regions);

} // namespace ecx
