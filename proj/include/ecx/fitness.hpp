#pragma once

// Fitness-complexity fixed point iteration on M, the fitness-ordered view of
// M and its triangularity diagnostic.

#include "ecx/rca.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace ecx {

struct FitnessOptions {
    double tol = 1e-9;
    int max_iter = 1000;
    // converged also requires every component to have settled relative to its
    // own size, so vectors collapsing geometrically towards zero (whose absolute
    // steps shrink below tol) are not reported as converged.
    double relative_tol = 1e-6;
    double initial = 1.0;
};

// Reciprocals in the complexity update use max(F_p, kFitnessFloor).
inline constexpr double kFitnessFloor = 1e-300;

struct FitnessStep {
    int iteration = 0;
    double max_abs_change = 0; // 0 for the initial state
    double min_fitness = 0;
    Eigen::VectorXd fitness;
};

struct FitnessResult {
    Eigen::VectorXd fitness;    // per region, mean 1
    Eigen::VectorXd complexity; // per sector, mean 1
    int iterations = 0;
    bool converged = false;
    std::vector<FitnessStep> trace; // iteration 0 is the normalized initial condition
    double tol = 0;
    double last_relative_change = 0;
};

// Unnormalized updates: F~_p = sum_s M_ps Q_s and Q~_s = 1 / sum_p M_ps / F_p.
Eigen::VectorXd fitness_update(const BinaryBipartiteMatrix& m, const Eigen::VectorXd& complexity);
Eigen::VectorXd complexity_update(const BinaryBipartiteMatrix& m, const Eigen::VectorXd& fitness);

// Iterates both updates simultaneously from F = Q = initial, normalizing each
// vector to mean 1 after every step, until max(|dF|_inf, |dQ|_inf) < tol or
// max_iter steps. Non-convergence is a result, not an error.
FitnessResult fitness_complexity(const BinaryBipartiteMatrix& m, const FitnessOptions& options = {});

struct OrderedMatrixView {
    std::vector<std::size_t> permutation_rows; // descending fitness
    std::vector<std::size_t> permutation_cols; // ascending complexity
    BinaryBipartiteMatrix matrix;
    double diagonal_clearance = 0;
};

// Samples the line from the top-right to the bottom-left corner at
// n = max(P, S) midpoints t_k = (k + 1/2) / n, cell (floor(P t_k), floor(S (1 - t_k))).
// Returns the fraction of sampled cells holding a 1 minus (n - 1) / n, so the
// value is positive exactly when the line avoids every vacant cell.
double diagonal_clearance(const BinaryMatrix& ordered);

OrderedMatrixView order_by_rank(const BinaryBipartiteMatrix& m, const FitnessResult& result);

// Fitness per region and step, one column per region code.
struct ConvergenceReport {
    std::vector<std::string> regions;
    std::vector<int> iterations;
    Eigen::MatrixXd values; // steps x regions
};

ConvergenceReport convergence_report(const BinaryBipartiteMatrix& m, const FitnessResult& result);

void write_fitness_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const FitnessResult& result);
void write_complexity_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const FitnessResult& result);
// iteration,<region codes...>
void write_trace_csv(std::ostream& out, const ConvergenceReport& report);
void write_ordered_csv(std::ostream& out, const OrderedMatrixView& view);
// Plain PBM (P1): 1 = black = occupied cell.
void write_ordered_pbm(std::ostream& out, const OrderedMatrixView& view);

} // namespace ecx
