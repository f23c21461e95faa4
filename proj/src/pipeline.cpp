#include "ecx/pipeline.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace ecx {

using json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxListedRejections = 50;

std::ifstream open_input(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw InputError(fmt::format("missing file {}", path.string()));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {}", path.string()));
    }
    return in;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    std::ostringstream buffer;
    body(buffer);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot write {}", path.string()));
    }
    out << buffer.str();
    if (!out.flush()) {
        throw IoError(fmt::format("write failed for {}", path.string()));
    }
}

void write_json(const fs::path& path, const json& j)
{
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

json read_json(const fs::path& path)
{
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(fmt::format("{}: {}", path.filename().string(), e.what()));
    }
}

// Runs f and re-raises library errors with the stage prefixed.
template <typename F>
auto in_stage(std::string_view stage, F&& f)
{
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", stage, e.what()));
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{}: {}", stage, e.what()));
    } catch (const IoError& e) {
        throw IoError(fmt::format("{}: {}", stage, e.what()));
    } catch (const fs::filesystem_error& e) {
        throw IoError(fmt::format("{}: {}", stage, e.what()));
    }
}

struct Catalogs {
    RegionCatalog regions;
    SectorCatalog sectors;
};

Catalogs load_catalogs(const fs::path& dir)
{
    auto r = open_input(dir / "regions.csv");
    auto s = open_input(dir / "sectors.csv");
    return {read_regions(r), read_sectors(s)};
}

BinaryBipartiteMatrix load_matrix(const fs::path& dir, const Catalogs& c)
{
    auto in = open_input(dir / "matrix.csv");
    return read_matrix_csv(in, c.regions, c.sectors);
}

json drop_list(const std::vector<DroppedLabel>& labels)
{
    json a = json::array();
    for (const auto& d : labels) {
        a.push_back({{"code", d.code}, {"reason", d.reason}});
    }
    return a;
}

json eigen_json(const EigenPair& p)
{
    json j;
    j["lambda1"] = p.leading_eigenvalue;
    j["lambda2"] = p.eigenvalue;
    j["lambda3"] = p.third_eigenvalue ? json(*p.third_eigenvalue) : json(nullptr);
    j["residual"] = p.residual_norm;
    j["solver"] = p.dense ? "dense" : "subspace";
    j["iterations"] = p.iterations;
    return j;
}

json correlation_json(const std::optional<Correlation>& c)
{
    if (!c) {
        return nullptr;
    }
    return {{"r", c->r}, {"p", c->p_value}, {"n", c->n}};
}

// label,value,rank file -> values aligned to labels.
std::vector<double> read_scores(const fs::path& path, const std::vector<std::string>& labels)
{
    auto in = open_input(path);
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row) || row.size() != 3) {
        throw InputError(fmt::format("{}: bad header", path.filename().string()));
    }
    std::map<std::string, double, std::less<>> values;
    while (reader.next(row)) {
        const auto v = row.size() == 3 ? csv::parse_double(row[1]) : std::nullopt;
        if (!v) {
            throw InputError(fmt::format("{} line {}: malformed row", path.filename().string(), reader.line()));
        }
        values[std::string(csv::trim(row[0]))] = *v;
    }
    std::vector<double> out;
    for (const auto& l : labels) {
        const auto it = values.find(l);
        if (it == values.end()) {
            throw InputError(fmt::format("{}: no value for '{}'", path.filename().string(), l));
        }
        out.push_back(it->second);
    }
    return out;
}

bool is_output_name(const std::string& name)
{
    static const std::set<std::string> fixed = {
        "sales.csv", "regions.csv", "sectors.csv", "macro.csv", "ingest.json", "rca.csv", "matrix.csv",
        "matrix.json", "eci.csv", "pci.csv", "eci.json", "fitness.csv", "complexity.csv", "trace.csv",
        "ordered_matrix.csv", "ordered_matrix.pbm", "fitness.json", "correlations.json", "stats.json",
        "quadrants.csv", "region_summary.csv"};
    return fixed.count(name) > 0 || name.rfind("mst_", 0) == 0 || name.rfind("fit_", 0) == 0;
}

} // namespace

std::string file_digest(const fs::path& path)
{
    auto in = open_input(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

void RunConfig::validate() const
{
    if (!(rca_threshold > 0)) {
        throw InputError("threshold must be positive");
    }
    if (!(fitness.tol > 0) || fitness.max_iter <= 0 || !(eigen.tol > 0) || eigen.max_iter <= 0) {
        throw InputError("tolerances and iteration limits must be positive");
    }
    std::vector<fs::path> inputs{firms, regions, sectors};
    if (macro) {
        inputs.push_back(*macro);
    }
    for (const auto& p : inputs) {
        if (p.empty() || !fs::is_regular_file(p)) {
            throw InputError(fmt::format("missing input file '{}'", p.string()));
        }
    }
}

void stage_ingest(const RunConfig& config)
{
    config.validate();
    fs::create_directories(config.out);
    RegionCatalog regions;
    SectorCatalog sectors;
    {
        auto in = open_input(config.regions);
        regions = read_regions(in);
    }
    {
        auto in = open_input(config.sectors);
        sectors = read_sectors(in);
    }
    FirmParseResult firms;
    {
        auto in = open_input(config.firms);
        firms = parse_firms(in, regions, sectors);
    }
    const auto sales = aggregate_sales(firms.records, regions, sectors);
    std::size_t excluded_records = 0;
    for (const auto& f : firms.records) {
        if (sectors[*sectors.find(f.sector_code)].excluded) {
            ++excluded_records;
        }
    }

    const auto& dir = config.out;
    write_file(dir / "regions.csv", [&](std::ostream& o) { write_regions(o, regions); });
    write_file(dir / "sectors.csv", [&](std::ostream& o) { write_sectors(o, sectors); });
    write_file(dir / "sales.csv", [&](std::ostream& o) { write_sales_csv(o, sales); });

    json j;
    json inputs;
    auto describe = [](const fs::path& p) {
        return json{{"file", p.filename().string()}, {"digest", file_digest(p)}};
    };
    inputs["firms"] = describe(config.firms);
    inputs["regions"] = describe(config.regions);
    inputs["sectors"] = describe(config.sectors);
    inputs["macro"] = config.macro ? describe(*config.macro) : json(nullptr);
    j["inputs"] = inputs;
    j["records"] = firms.records.size();
    j["rejected"] = firms.rejections.size();
    json rejections = json::array();
    for (std::size_t i = 0; i < firms.rejections.size() && i < kMaxListedRejections; ++i) {
        rejections.push_back({{"line", firms.rejections[i].line}, {"reason", firms.rejections[i].reason}});
    }
    j["rejections"] = rejections;
    j["zero_sales"] = firms.zero_sales;
    j["excluded_sector_records"] = excluded_records;
    j["excluded_sectors"] = sectors.excluded_count();
    j["regions"] = sales.regions.size();
    j["sectors"] = sales.sectors.size();
    j["total_sales"] = sales.total();

    if (config.macro) {
        auto in = open_input(*config.macro);
        const auto macro = parse_macro(in, regions);
        write_file(dir / "macro.csv", [&](std::ostream& o) { write_macro(o, macro, regions); });
        json missing = json::array();
        for (std::size_t i = 0; i < regions.size(); ++i) {
            if (!macro.rows[i]) {
                missing.push_back(regions[i].code);
            }
        }
        json rej = json::array();
        for (const auto& r : macro.rejections) {
            rej.push_back({{"line", r.line}, {"reason", r.reason}});
        }
        j["macro"] = {{"rows", macro.present()}, {"missing_regions", missing}, {"rejections", rej}};
    } else {
        std::error_code ec;
        fs::remove(dir / "macro.csv", ec);
        j["macro"] = nullptr;
    }
    write_json(dir / "ingest.json", j);
}

void stage_matrix(const fs::path& dir, double threshold)
{
    const auto c = load_catalogs(dir);
    SalesMatrix sales;
    {
        auto in = open_input(dir / "sales.csv");
        sales = read_sales_csv(in, c.regions, c.sectors.kept());
    }
    const auto rca = compute_rca(sales);
    const auto m = binarize(rca, threshold);
    const auto profile = degree_profile(m);
    write_file(dir / "rca.csv", [&](std::ostream& o) { write_rca_csv(o, rca); });
    write_file(dir / "matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, m); });

    json j;
    j["threshold"] = threshold;
    j["regions"] = m.rows();
    j["sectors"] = m.cols();
    j["ones"] = m.ones();
    j["density"] = static_cast<double>(m.ones()) / static_cast<double>(m.rows() * m.cols());
    j["mean_k_p0"] = profile.mean_k_p0;
    j["mean_k_p1"] = profile.mean_k_p1;
    j["dropped"] = {{"rows", drop_list(m.dropped().rows)}, {"columns", drop_list(m.dropped().columns)}};
    write_json(dir / "matrix.json", j);
}

void stage_eci(const fs::path& dir, const EigenOptions& options)
{
    const auto c = load_catalogs(dir);
    const auto m = load_matrix(dir, c);
    const auto ci = compute_indices(m, options);
    write_file(dir / "eci.csv", [&](std::ostream& o) { write_eci_csv(o, m, ci); });
    write_file(dir / "pci.csv", [&](std::ostream& o) { write_pci_csv(o, m, ci); });
    json j;
    j["tol"] = options.tol;
    j["max_iter"] = options.max_iter;
    j["spectral_gap"] = ci.spectral_gap;
    j["region"] = eigen_json(ci.region);
    j["sector"] = eigen_json(ci.sector);
    write_json(dir / "eci.json", j);
}

void stage_fitness(const fs::path& dir, const FitnessOptions& options)
{
    const auto c = load_catalogs(dir);
    const auto m = load_matrix(dir, c);
    const auto result = fitness_complexity(m, options);
    const auto view = order_by_rank(m, result);
    const auto report = convergence_report(m, result);
    write_file(dir / "fitness.csv", [&](std::ostream& o) { write_fitness_csv(o, m, result); });
    write_file(dir / "complexity.csv", [&](std::ostream& o) { write_complexity_csv(o, m, result); });
    write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, report); });
    write_file(dir / "ordered_matrix.csv", [&](std::ostream& o) { write_ordered_csv(o, view); });
    write_file(dir / "ordered_matrix.pbm", [&](std::ostream& o) { write_ordered_pbm(o, view); });

    json j;
    j["tol"] = options.tol;
    j["max_iter"] = options.max_iter;
    j["relative_tol"] = options.relative_tol;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["last_max_abs_change"] = result.trace.back().max_abs_change;
    j["last_relative_change"] = result.last_relative_change;
    j["min_fitness"] = result.fitness.minCoeff();
    j["diagonal_clearance"] = view.diagonal_clearance;
    j["row_order"] = view.matrix.regions().codes();
    j["column_order"] = view.matrix.sectors().codes();
    write_json(dir / "fitness.json", j);
}

void stage_mst(const fs::path& dir, Entity entity, TreeFormat format)
{
    const auto c = load_catalogs(dir);
    const auto m = load_matrix(dir, c);
    const auto tree = max_similarity_tree(similarity(project(m, entity)));
    const auto stem = fmt::format("mst_{}", entity_name(entity));
    write_file(dir / fmt::format("{}.{}", stem, tree_format_extension(format)),
               [&](std::ostream& o) { export_tree(o, tree, node_attributes(m, entity), format); });
    json j;
    j["entity"] = entity_name(entity);
    j["format"] = tree_format_extension(format);
    j["nodes"] = tree.labels.size();
    j["edges"] = tree.edges.size();
    j["root"] = tree.labels[tree.edges.front().a];
    j["total_weight"] = tree.total_weight;
    write_json(dir / (stem + ".json"), j);
}

void stage_correlate(const fs::path& dir, const CorrelateOptions& options)
{
    const auto c = load_catalogs(dir);
    const auto m = load_matrix(dir, c);
    const auto labels = m.regions().codes();
    const auto profile = degree_profile(m);
    const auto quads = quadrants(profile);
    write_file(dir / "quadrants.csv", [&](std::ostream& o) { write_quadrants_csv(o, m, profile, quads); });

    std::vector<std::string> indices;
    for (const std::string name : {"eci", "fitness"}) {
        if (!options.index || *options.index == name) {
            indices.push_back(name);
        }
    }
    if (indices.empty()) {
        throw InputError(fmt::format("unknown index '{}' (expected eci|fitness)", *options.index));
    }
    std::map<std::string, std::vector<double>> scores;
    for (const auto& index : indices) {
        scores[index] = read_scores(dir / (index + ".csv"), labels);
    }

    std::optional<MacroIndicators> macro;
    if (fs::exists(dir / "macro.csv")) {
        auto in = open_input(dir / "macro.csv");
        macro = parse_macro(in, c.regions);
    } else if (options.indicator) {
        throw InputError("no macro.csv in the working directory; pass --macro to ingest");
    }
    std::vector<Indicator> indicators;
    for (const auto ind : {Indicator::gpp_per_capita, Indicator::income_per_person}) {
        if (macro && (!options.indicator || *options.indicator == ind)) {
            indicators.push_back(ind);
        }
    }

    json correlations = json::array();
    json fits = json::array();
    for (const auto& index : indices) {
        std::vector<std::optional<double>> x(scores[index].begin(), scores[index].end());
        for (const auto ind : indicators) {
            const auto y = indicator_values(*macro, c.regions, m.regions(), ind);
            const auto sample = pairwise_complete(x, y);
            const std::string y_name(indicator_name(ind));
            std::optional<Correlation> corr;
            if (sample.x.size() >= 3) {
                corr = pearson(sample.x, sample.y);
                correlations.push_back(
                    {{"x_name", index}, {"y_name", y_name}, {"r", corr->r}, {"p", corr->p_value}, {"n", corr->n}});
            }

            const FitModel model = options.fit.value_or(index == "eci" ? FitModel::exponential : FitModel::power);
            std::vector<double> fx;
            std::vector<double> fy;
            std::vector<std::string> fl;
            std::size_t skipped = 0;
            for (std::size_t k = 0; k < sample.x.size(); ++k) {
                // A log-log fit cannot use regions whose fitness collapsed to 0.
                if (model == FitModel::power && !(sample.x[k] > 0)) {
                    ++skipped;
                    continue;
                }
                fx.push_back(sample.x[k]);
                fy.push_back(sample.y[k]);
                fl.push_back(labels[sample.index[k]]);
            }
            if (fx.size() < 2) {
                continue;
            }
            const auto f = fit(model, fx, fy, fl);
            write_file(dir / fmt::format("fit_{}_{}.csv", index, y_name),
                       [&](std::ostream& o) { write_fit_csv(o, f, fl); });
            const auto ranking = residual_ranking(f, fl);
            fits.push_back({{"x_name", index},
                            {"y_name", y_name},
                            {"model", fit_model_name(model)},
                            {"a", f.a},
                            {"b", f.b},
                            {"rmse_log", f.rmse_log},
                            {"n", fx.size()},
                            {"skipped_nonpositive", skipped},
                            {"most_below", ranking.front().label},
                            {"most_above", ranking.back().label}});
        }
    }
    write_json(dir / "correlations.json", correlations);

    json stats;
    stats["fits"] = fits;
    json counts = json::object();
    for (const auto q : {Quadrant::q1, Quadrant::q2, Quadrant::q3, Quadrant::q4}) {
        counts[std::string(quadrant_name(q))] = std::count(quads.quadrant.begin(), quads.quadrant.end(), q);
    }
    stats["quadrants"] = {{"mean_k_p0", quads.mean_k_p0}, {"mean_k_p1", quads.mean_k_p1}, {"counts", counts}};

    if (scores.count("eci") && scores.count("fitness")) {
        const auto agreement = rank_agreement({labels, scores["eci"]}, {labels, scores["fitness"]});
        json table = json::array();
        for (const auto& row : agreement.table) {
            table.push_back({{"label", row.label}, {"rank_eci", row.rank_a}, {"rank_fitness", row.rank_b}});
        }
        stats["rank_agreement"] = {{"kendall_tau_b", agreement.kendall_tau}, {"table", table}};
    } else {
        stats["rank_agreement"] = nullptr;
    }

    if (scores.count("eci")) {
        std::vector<std::optional<double>> none(labels.size());
        const auto gpp = macro ? indicator_values(*macro, c.regions, m.regions(), Indicator::gpp_per_capita) : none;
        const auto income =
            macro ? indicator_values(*macro, c.regions, m.regions(), Indicator::income_per_person) : none;
        const auto summary = region_averages(scores["eci"], gpp, income, m.regions(), options.tokyo_code);
        write_file(dir / "region_summary.csv", [&](std::ostream& o) { write_region_summary_csv(o, summary); });
        auto variant = [](const RegionSummaryVariant& v) {
            return json{{"groups", v.groups.size()},
                        {"eci_vs_gpp_per_capita", correlation_json(v.eci_vs_gpp_per_capita)},
                        {"eci_vs_income", correlation_json(v.eci_vs_income)}};
        };
        stats["region_summary"] = {{"tokyo_code", summary.tokyo_code},
                                   {"tokyo_present", summary.tokyo_present},
                                   {"primary", summary.primary},
                                   {"tokyo_separate", variant(summary.tokyo_separate)},
                                   {"kanto_with_tokyo", variant(summary.kanto_with_tokyo)}};
    } else {
        stats["region_summary"] = nullptr;
    }
    write_json(dir / "stats.json", stats);
}

std::string stage_report(const fs::path& dir)
{
    auto optional_json = [&](const std::string& name) {
        return fs::exists(dir / name) ? read_json(dir / name) : json(nullptr);
    };
    const auto ingest = read_json(dir / "ingest.json");
    const auto matrix = read_json(dir / "matrix.json");

    json r;
    r["inputs"] = ingest["inputs"];
    r["ingest"] = {{"records", ingest["records"]},
                   {"rejected", ingest["rejected"]},
                   {"zero_sales", ingest["zero_sales"]},
                   {"excluded_sector_records", ingest["excluded_sector_records"]},
                   {"macro_rows", ingest["macro"].is_null() ? json(nullptr) : ingest["macro"]["rows"]}};
    r["matrix"] = {{"threshold", matrix["threshold"]},
                   {"regions", matrix["regions"]},
                   {"sectors", matrix["sectors"]},
                   {"density", matrix["density"]}};
    r["dropped"] = matrix["dropped"];
    r["eci"] = optional_json("eci.json");
    r["fitness"] = nullptr;
    if (const auto f = optional_json("fitness.json"); !f.is_null()) {
        r["fitness"] = {{"converged", f["converged"]},
                        {"iterations", f["iterations"]},
                        {"tol", f["tol"]},
                        {"last_max_abs_change", f["last_max_abs_change"]},
                        {"min_fitness", f["min_fitness"]},
                        {"diagonal_clearance", f["diagonal_clearance"]}};
    }
    r["trees"] = {{"region", optional_json("mst_region.json")}, {"sector", optional_json("mst_sector.json")}};
    r["correlations"] = optional_json("correlations.json");
    const auto stats = optional_json("stats.json");
    r["fits"] = stats.is_null() ? json(nullptr) : stats["fits"];
    r["rank_agreement"] = stats.is_null() || stats["rank_agreement"].is_null()
                              ? json(nullptr)
                              : json{{"kendall_tau_b", stats["rank_agreement"]["kendall_tau_b"]}};
    r["region_summary"] = stats.is_null() ? json(nullptr) : stats["region_summary"];

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && is_output_name(name)) {
            names.push_back(name);
        }
    }
    std::sort(names.begin(), names.end());
    json manifest = json::array();
    for (const auto& name : names) {
        manifest.push_back({{"file", name}, {"bytes", fs::file_size(dir / name)}, {"digest", file_digest(dir / name)}});
    }
    r["manifest"] = manifest;

    const auto text = r.dump(2) + "\n";
    write_file(dir / "report.json", [&](std::ostream& o) { o << text; });
    return text;
}

void stage_synth(const fs::path& dir, const SyntheticOptions& options)
{
    const auto data = generate_synthetic(options);
    fs::create_directories(dir);
    write_file(dir / "firms.csv", [&](std::ostream& o) { write_firms_csv(o, data.firms); });
    write_file(dir / "macro.csv", [&](std::ostream& o) { write_macro(o, data.macro, data.regions); });
    write_file(dir / "regions.csv", [&](std::ostream& o) { write_regions(o, data.regions); });
    write_file(dir / "sectors.csv", [&](std::ostream& o) { write_sectors(o, data.sectors); });
    json j;
    j["shape"] = shape_name(options.shape);
    j["p"] = data.regions.size();
    j["s"] = data.sectors.kept().size();
    j["fill"] = options.fill;
    j["seed"] = options.seed;
    j["firms"] = data.firms.size();
    j["support_density"] = data.density;
    write_json(dir / "synth.json", j);
}

std::string run_pipeline(const RunConfig& config)
{
    in_stage("config", [&] { config.validate(); });
    const auto& dir = config.out;
    in_stage("ingest", [&] { stage_ingest(config); });
    in_stage("matrix", [&] { stage_matrix(dir, config.rca_threshold); });

    auto eci = std::async(std::launch::async, [&] { in_stage("eci", [&] { stage_eci(dir, config.eigen); }); });
    auto fitness =
        std::async(std::launch::async, [&] { in_stage("fitness", [&] { stage_fitness(dir, config.fitness); }); });
    auto mst = std::async(std::launch::async, [&] {
        in_stage("mst", [&] {
            stage_mst(dir, Entity::region, TreeFormat::dot);
            stage_mst(dir, Entity::sector, TreeFormat::dot);
        });
    });
    // Wait for every task before rethrowing so no thread outlives the call.
    std::exception_ptr first;
    for (auto* f : {&eci, &fitness, &mst}) {
        try {
            f->get();
        } catch (...) {
            if (!first) {
                first = std::current_exception();
            }
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }

    CorrelateOptions correlate;
    correlate.tokyo_code = config.tokyo_code;
    in_stage("correlate", [&] { stage_correlate(dir, correlate); });
    return in_stage("report", [&] { return stage_report(dir); });
}

} // namespace ecx
