#include "ecx/fitness.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"
#include "ecx/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace ecx {

Eigen::VectorXd fitness_update(const BinaryBipartiteMatrix& m, const Eigen::VectorXd& complexity)
{
    return m.values().cast<double>() * complexity;
}

Eigen::VectorXd complexity_update(const BinaryBipartiteMatrix& m, const Eigen::VectorXd& fitness)
{
    const Eigen::VectorXd inverse = fitness.cwiseMax(kFitnessFloor).cwiseInverse();
    const Eigen::VectorXd sums = m.values().cast<double>().transpose() * inverse;
    return sums.cwiseInverse();
}

namespace {

Eigen::VectorXd normalized(const Eigen::VectorXd& v)
{
    const double mean = v.mean();
    if (!(mean > 0) || !std::isfinite(mean)) {
        throw NumericalError("fitness iteration produced a non-positive or non-finite mean");
    }
    return v / mean;
}

double max_relative_change(const Eigen::VectorXd& now, const Eigen::VectorXd& before)
{
    double worst = 0;
    for (Eigen::Index i = 0; i < now.size(); ++i) {
        const double d = std::abs(now(i) - before(i));
        if (d == 0) {
            continue;
        }
        worst = std::max(worst, now(i) > 0 ? d / now(i) : std::numeric_limits<double>::infinity());
    }
    return worst;
}

} // namespace

FitnessResult fitness_complexity(const BinaryBipartiteMatrix& m, const FitnessOptions& options)
{
    if (!(options.tol > 0) || options.max_iter <= 0 || !(options.relative_tol > 0) || !(options.initial > 0)) {
        throw InputError("fitness tol, relative_tol, initial value and max_iter must be positive");
    }
    FitnessResult r;
    r.tol = options.tol;
    Eigen::VectorXd f = normalized(Eigen::VectorXd::Constant(m.rows(), options.initial));
    Eigen::VectorXd q = normalized(Eigen::VectorXd::Constant(m.cols(), options.initial));
    r.trace.push_back({0, 0.0, f.minCoeff(), f});

    for (int n = 1; n <= options.max_iter; ++n) {
        Eigen::VectorXd f_next = normalized(fitness_update(m, q));
        Eigen::VectorXd q_next = normalized(complexity_update(m, f));
        const double change = std::max((f_next - f).lpNorm<Eigen::Infinity>(), (q_next - q).lpNorm<Eigen::Infinity>());
        r.last_relative_change = std::max(max_relative_change(f_next, f), max_relative_change(q_next, q));
        f = std::move(f_next);
        q = std::move(q_next);
        r.trace.push_back({n, change, f.minCoeff(), f});
        r.iterations = n;
        if (change < options.tol) {
            r.converged = r.last_relative_change < options.relative_tol;
            break;
        }
    }
    r.fitness = std::move(f);
    r.complexity = std::move(q);
    return r;
}

double diagonal_clearance(const BinaryMatrix& ordered)
{
    const auto P = static_cast<long long>(ordered.rows());
    const auto S = static_cast<long long>(ordered.cols());
    const long long n = std::max(P, S);
    long long filled = 0;
    for (long long k = 0; k < n; ++k) {
        const long long row = P * (2 * k + 1) / (2 * n);
        const long long col = S * (2 * n - 2 * k - 1) / (2 * n);
        filled += ordered(row, col) != 0;
    }
    const double nd = static_cast<double>(n);
    return static_cast<double>(filled) / nd - (nd - 1) / nd;
}

OrderedMatrixView order_by_rank(const BinaryBipartiteMatrix& m, const FitnessResult& result)
{
    if (result.fitness.size() != m.rows() || result.complexity.size() != m.cols()) {
        throw InputError("fitness result does not match the matrix");
    }
    const auto region_codes = m.regions().codes();
    const auto sector_codes = m.sectors().codes();
    auto rows = order_descending({result.fitness.data(), region_codes.size()}, region_codes);

    std::vector<std::size_t> cols(sector_codes.size());
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    const auto& q = result.complexity;
    std::sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        if (q(ia) != q(ib)) {
            return q(ia) < q(ib);
        }
        return sector_codes[a] < sector_codes[b];
    });

    auto matrix = m.permuted(rows, cols);
    const double clearance = diagonal_clearance(matrix.values());
    return {std::move(rows), std::move(cols), std::move(matrix), clearance};
}

ConvergenceReport convergence_report(const BinaryBipartiteMatrix& m, const FitnessResult& result)
{
    ConvergenceReport report;
    report.regions = m.regions().codes();
    report.values.resize(static_cast<Eigen::Index>(result.trace.size()), m.rows());
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        report.iterations.push_back(result.trace[i].iteration);
        report.values.row(static_cast<Eigen::Index>(i)) = result.trace[i].fitness.transpose();
    }
    return report;
}

void write_fitness_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const FitnessResult& result)
{
    const auto labels = m.regions().codes();
    write_score_csv(out, "region_code", "fitness", labels, {result.fitness.data(), labels.size()});
}

void write_complexity_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const FitnessResult& result)
{
    const auto labels = m.sectors().codes();
    write_score_csv(out, "sector_code", "complexity", labels, {result.complexity.data(), labels.size()});
}

void write_trace_csv(std::ostream& out, const ConvergenceReport& report)
{
    csv::Row header{"iteration"};
    header.insert(header.end(), report.regions.begin(), report.regions.end());
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < report.values.rows(); ++i) {
        csv::Row row{std::to_string(report.iterations[static_cast<std::size_t>(i)])};
        for (Eigen::Index j = 0; j < report.values.cols(); ++j) {
            row.push_back(csv::format_double(report.values(i, j)));
        }
        csv::write_row(out, row);
    }
}

void write_ordered_csv(std::ostream& out, const OrderedMatrixView& view)
{
    write_matrix_csv(out, view.matrix);
}

void write_ordered_pbm(std::ostream& out, const OrderedMatrixView& view)
{
    const auto& v = view.matrix.values();
    out << "P1\n" << v.cols() << ' ' << v.rows() << '\n';
    for (Eigen::Index p = 0; p < v.rows(); ++p) {
        for (Eigen::Index s = 0; s < v.cols(); ++s) {
            out << (s ? " " : "") << v(p, s);
        }
        out << '\n';
    }
}

} // namespace ecx
