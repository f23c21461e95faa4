// ecx: economic complexity pipeline on the command line.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 numerical error, 4 I/O error.

#include "ecx/error.hpp"
#include "ecx/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

std::string default_out()
{
    const char* env = std::getenv("ECX_OUT");
    return env && *env ? env : ".";
}

struct Args {
    std::string out = default_out();
    std::string firms, regions, sectors, macro;
    double threshold = 1.0;
    double eci_tol = 1e-10;
    int eci_max_iter = 10000;
    double fit_tol = 1e-9;
    int fit_max_iter = 1000;
    double relative_tol = 1e-6;
    std::string entity = "region";
    std::string format = "dot";
    std::string indicator, index, fit;
    std::string tokyo = "TK";
    std::string shape = "nested";
    std::size_t p = 47;
    std::size_t s = 91;
    double fill = 1.0;
    std::uint64_t seed = 7;
};

ecx::RunConfig run_config(const Args& a)
{
    ecx::RunConfig c;
    c.firms = a.firms;
    c.regions = a.regions;
    c.sectors = a.sectors;
    if (!a.macro.empty()) {
        c.macro = a.macro;
    }
    c.out = a.out;
    c.rca_threshold = a.threshold;
    c.eigen.tol = a.eci_tol;
    c.eigen.max_iter = a.eci_max_iter;
    c.fitness.tol = a.fit_tol;
    c.fitness.max_iter = a.fit_max_iter;
    c.fitness.relative_tol = a.relative_tol;
    c.tokyo_code = a.tokyo;
    return c;
}

void add_out(CLI::App* cmd, Args& a)
{
    cmd->add_option("--out,-o", a.out, "Working directory (default: $ECX_OUT or .)");
}

void add_inputs(CLI::App* cmd, Args& a)
{
    cmd->add_option("--firms", a.firms, "firms.csv")->required();
    cmd->add_option("--regions", a.regions, "regions.csv catalog")->required();
    cmd->add_option("--sectors", a.sectors, "sectors.csv catalog")->required();
    cmd->add_option("--macro", a.macro, "macro.csv indicator table");
}

void add_eci_options(CLI::App* cmd, Args& a)
{
    cmd->add_option("--eci-tol", a.eci_tol, "Eigenpair residual tolerance");
    cmd->add_option("--eci-max-iter", a.eci_max_iter, "Iteration cap for large matrices");
}

void add_fitness_options(CLI::App* cmd, Args& a, bool short_names)
{
    cmd->add_option(short_names ? "--tol" : "--fitness-tol", a.fit_tol, "Max-norm change tolerance");
    cmd->add_option(short_names ? "--max-iter" : "--fitness-max-iter", a.fit_max_iter, "Iteration cap");
    cmd->add_option("--relative-tol", a.relative_tol, "Relative change required for a converged verdict");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Economic complexity analytics for region x sector economies"};
    app.require_subcommand(1);
    Args a;

    auto* ingest = app.add_subcommand("ingest", "Parse firms and catalogs into sales.csv");
    add_inputs(ingest, a);
    add_out(ingest, a);

    auto* matrix = app.add_subcommand("matrix", "RCA and the binary matrix M");
    matrix->add_option("--threshold", a.threshold, "RCA threshold (M = RCA >= threshold)");
    add_out(matrix, a);

    auto* eci = app.add_subcommand("eci", "ECI and PCI");
    eci->add_option("--tol", a.eci_tol, "Eigenpair residual tolerance");
    eci->add_option("--max-iter", a.eci_max_iter, "Iteration cap for large matrices");
    add_out(eci, a);

    auto* fitness = app.add_subcommand("fitness", "Fitness and complexity");
    add_fitness_options(fitness, a, true);
    add_out(fitness, a);

    auto* mst = app.add_subcommand("mst", "Maximum similarity spanning tree");
    mst->add_option("--entity", a.entity, "region|sector")->check(CLI::IsMember({"region", "sector"}));
    mst->add_option("--format", a.format, "dot|graphml|csv")->check(CLI::IsMember({"dot", "graphml", "csv"}));
    add_out(mst, a);

    auto* correlate = app.add_subcommand("correlate", "Correlations, fits, quadrants, regional averages");
    correlate->add_option("--indicator", a.indicator, "gpp_per_capita|income (default: both)");
    correlate->add_option("--index", a.index, "eci|fitness (default: both)")
        ->check(CLI::IsMember({"eci", "fitness"}));
    correlate->add_option("--fit", a.fit, "exp|power (default: exp for eci, power for fitness)")
        ->check(CLI::IsMember({"exp", "exponential", "power"}));
    correlate->add_option("--tokyo", a.tokyo, "Region code reported as its own group");
    add_out(correlate, a);

    auto* report = app.add_subcommand("report", "Collect stage outputs into report.json");
    add_out(report, a);

    auto* synth = app.add_subcommand("synth", "Write a synthetic economy (firms, macro, catalogs)");
    synth->add_option("--shape", a.shape, "nested|modular|random");
    synth->add_option("--p", a.p, "Number of regions")->check(CLI::PositiveNumber);
    synth->add_option("--s", a.s, "Number of sectors")->check(CLI::PositiveNumber);
    synth->add_option("--fill", a.fill, "Fill fraction in (0, 1]");
    synth->add_option("--seed", a.seed, "Seed for std::mt19937_64");
    synth->add_option("--regions", a.regions, "Use this region catalog instead of generated codes");
    synth->add_option("--sectors", a.sectors, "Use this sector catalog instead of generated codes");
    add_out(synth, a);

    auto* run = app.add_subcommand("run", "Full pipeline: ingest through report");
    add_inputs(run, a);
    run->add_option("--threshold", a.threshold, "RCA threshold");
    add_eci_options(run, a);
    add_fitness_options(run, a, false);
    run->add_option("--tokyo", a.tokyo, "Region code reported as its own group");
    add_out(run, a);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every other parse failure is a usage error.
        return app.exit(e) == 0 ? 0 : 1;
    }

    const auto* cmd = app.get_subcommands().front();
    try {
        const ecx::fs::path out = a.out;
        if (cmd == ingest) {
            ecx::stage_ingest(run_config(a));
        } else if (cmd == matrix) {
            ecx::stage_matrix(out, a.threshold);
        } else if (cmd == eci) {
            ecx::EigenOptions o;
            o.tol = a.eci_tol;
            o.max_iter = a.eci_max_iter;
            ecx::stage_eci(out, o);
        } else if (cmd == fitness) {
            ecx::FitnessOptions o;
            o.tol = a.fit_tol;
            o.max_iter = a.fit_max_iter;
            o.relative_tol = a.relative_tol;
            ecx::stage_fitness(out, o);
        } else if (cmd == mst) {
            ecx::stage_mst(out, ecx::parse_entity(a.entity), ecx::parse_tree_format(a.format));
        } else if (cmd == correlate) {
            ecx::CorrelateOptions o;
            if (!a.indicator.empty()) {
                o.indicator = ecx::parse_indicator(a.indicator);
            }
            if (!a.index.empty()) {
                o.index = a.index;
            }
            if (!a.fit.empty()) {
                o.fit = ecx::parse_fit_model(a.fit);
            }
            o.tokyo_code = a.tokyo;
            ecx::stage_correlate(out, o);
        } else if (cmd == report) {
            ecx::stage_report(out);
        } else if (cmd == synth) {
            ecx::SyntheticOptions o;
            o.shape = ecx::parse_shape(a.shape);
            o.p = a.p;
            o.s = a.s;
            o.fill = a.fill;
            o.seed = a.seed;
            if (!a.regions.empty()) {
                std::ifstream in(a.regions);
                if (!in) {
                    throw ecx::InputError(fmt::format("missing file {}", a.regions));
                }
                o.regions = ecx::read_regions(in);
            }
            if (!a.sectors.empty()) {
                std::ifstream in(a.sectors);
                if (!in) {
                    throw ecx::InputError(fmt::format("missing file {}", a.sectors));
                }
                o.sectors = ecx::read_sectors(in);
            }
            ecx::stage_synth(out, o);
        } else if (cmd == run) {
            ecx::run_pipeline(run_config(a));
        }
    } catch (const ecx::InputError& e) {
        fmt::print(stderr, "ecx {}: input error: {}\n", cmd->get_name(), e.what());
        return 2;
    } catch (const ecx::NumericalError& e) {
        fmt::print(stderr, "ecx {}: numerical error: {}\n", cmd->get_name(), e.what());
        return 3;
    } catch (const ecx::IoError& e) {
        fmt::print(stderr, "ecx {}: I/O error: {}\n", cmd->get_name(), e.what());
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "ecx {}: I/O error: {}\n", cmd->get_name(), e.what());
        return 4;
    }
    return 0;
}
