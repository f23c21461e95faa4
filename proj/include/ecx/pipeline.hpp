#pragma once

// End-to-end orchestration. Every stage reads its inputs from and writes its
// outputs to one working directory, so stages can run as separate CLI
// invocations or chained by run_pipeline with identical results.

#include "ecx/eci.hpp"
#include "ecx/fitness.hpp"
#include "ecx/projections.hpp"
#include "ecx/stats.hpp"
#include "ecx/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

namespace fs = std::filesystem;

struct RunConfig {
    fs::path firms;
    fs::path regions;
    fs::path sectors;
    std::optional<fs::path> macro;
    fs::path out = ".";
    double rca_threshold = 1.0;
    FitnessOptions fitness;
    EigenOptions eigen;
    std::string tokyo_code = "TK";

    // Throws InputError on nonpositive tolerances or missing input files.
    void validate() const;
};

// Selection for the correlate stage; nullopt means every choice.
struct CorrelateOptions {
    std::optional<Indicator> indicator;
    std::optional<std::string> index; // "eci" | "fitness"
    std::optional<FitModel> fit;      // default: exp for eci, power for fitness
    std::string tokyo_code = "TK";
};

// 64-bit FNV-1a over the file contents, as 16 hex digits.
std::string file_digest(const fs::path& path);

// sales.csv, regions.csv, sectors.csv, macro.csv (when given), ingest.json
void stage_ingest(const RunConfig& config);
// rca.csv, matrix.csv, matrix.json
void stage_matrix(const fs::path& dir, double threshold);
// eci.csv, pci.csv, eci.json
void stage_eci(const fs::path& dir, const EigenOptions& options);
// fitness.csv, complexity.csv, trace.csv, ordered_matrix.csv, ordered_matrix.pbm, fitness.json
void stage_fitness(const fs::path& dir, const FitnessOptions& options);
// mst_<entity>.<format>, mst_<entity>.json
void stage_mst(const fs::path& dir, Entity entity, TreeFormat format);
// correlations.json, stats.json, fit_<index>_<indicator>.csv, quadrants.csv, region_summary.csv
void stage_correlate(const fs::path& dir, const CorrelateOptions& options);
// report.json; returns its contents.
std::string stage_report(const fs::path& dir);

// Writes the synthetic tables (firms.csv, macro.csv, regions.csv, sectors.csv)
// plus synth.json into dir.
void stage_synth(const fs::path& dir, const SyntheticOptions& options);

// ingest -> matrix -> (eci | fitness | mst) -> correlate -> report.
// Errors are rethrown with the failing stage named in the message.
std::string run_pipeline(const RunConfig& config);

} // namespace ecx
