#pragma once

// Deterministic synthetic economies for tests and demos.

#include "ecx/ingest.hpp"
#include "ecx/rca.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ecx {

enum class Shape { nested, modular, random };

std::string_view shape_name(Shape shape);
Shape parse_shape(std::string_view name);

// std::mt19937_64 has a fully specified output sequence; the conversions
// below are written out so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(); // [0, 1), 53 random bits
    double normal();  // Box-Muller, one draw per call
    std::uint64_t below(std::uint64_t n); // [0, n)

private:
    std::mt19937_64 engine_;
};

struct SyntheticOptions {
    std::size_t p = 47;
    std::size_t s = 91;
    Shape shape = Shape::nested;
    double fill = 1.0;
    std::uint64_t seed = 7;
    // When set, used instead of generated R01../S01.. catalogs; p and s are
    // then taken from the catalogs (kept sectors only).
    std::optional<RegionCatalog> regions;
    std::optional<SectorCatalog> sectors;
};

struct SyntheticData {
    RegionCatalog regions;
    SectorCatalog sectors; // may contain excluded sectors
    std::vector<FirmRecord> firms;
    MacroIndicators macro;
    BinaryMatrix support; // nonzero sales cells over regions x kept sectors
    double density = 0;
};

// nested: row i holds the first max(1, ceil(fill (p - i) s / p)) sectors.
// modular: regions and sectors split into up to 4 blocks, cells inside a block
// kept with probability fill. random: every cell kept with probability fill.
// Empty rows/columns of modular and random supports get one cell. Macro
// values increase with the row index.
SyntheticData generate_synthetic(const SyntheticOptions& options);

void write_firms_csv(std::ostream& out, std::span<const FirmRecord> firms);

} // namespace ecx
