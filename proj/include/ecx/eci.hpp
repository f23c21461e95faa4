#pragma once

// Economic and product complexity indices from the second eigenvector of the
// region-region and sector-sector transition matrices built from M.

#include "ecx/rca.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

enum class Entity { region, sector };

std::string_view entity_name(Entity kind);
Entity parse_entity(std::string_view name);

// Row-stochastic matrix M~. For regions
//   M~_pp' = sum_s M_ps M_p's / (k_p0 k_s0),
// for sectors
//   M~_ss' = sum_p M_ps M_ps' / (k_p0 k_s0),
// i.e. the probability of stepping from one node to another through a shared
// neighbour on the other side of the bipartite graph.
struct TransitionMatrix {
    Eigen::MatrixXd values;
    Entity kind = Entity::region;
    std::vector<std::string> labels;
};

TransitionMatrix build_transition(const BinaryBipartiteMatrix& m, Entity kind);

struct EigenOptions {
    double tol = 1e-10;
    int max_iter = 10000;
    // Matrices up to this size use a full dense decomposition; larger ones
    // use deflated subspace iteration.
    Eigen::Index dense_limit = 64;
};

struct EigenPair {
    double eigenvalue = 0;
    Eigen::VectorXd eigenvector; // unit Euclidean length, sign as produced by the solver
    double residual_norm = 0;    // ||T v - lambda v||_inf
    double leading_eigenvalue = 1;
    std::optional<double> third_eigenvalue;
    bool dense = true;
    int iterations = 0;
};

// Eigenpair of the eigenvalue with the second largest real part.
// Throws NumericalError("degenerate spectrum ...") when lambda2 is not simple
// (|lambda2 - lambda3| < tol or |lambda1 - lambda2| < tol) or has a nonzero
// imaginary part, and when the iterative path does not converge.
EigenPair second_eigenpair(const TransitionMatrix& t, const EigenOptions& options = {});

struct ComplexityIndices {
    Eigen::VectorXd eci; // per region, mean 0 / population stdev 1
    Eigen::VectorXd pci; // per sector
    double second_eigenvalue_region = 0;
    double second_eigenvalue_sector = 0;
    double spectral_gap = 0; // lambda1 - lambda2 of the region matrix
    EigenPair region;
    EigenPair sector;
};

// (v - mean(v)) / stdev(v) with the population standard deviation.
Eigen::VectorXd standardize(const Eigen::VectorXd& v);

// ECI and PCI with the sign fixed so that ECI correlates non-negatively with
// diversification and PCI non-negatively with negative ubiquity.
ComplexityIndices compute_indices(const BinaryBipartiteMatrix& m, const EigenOptions& options = {});

// eci.csv: region_code,eci,rank   pci.csv: sector_code,pci,rank
void write_eci_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const ComplexityIndices& ci);
void write_pci_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const ComplexityIndices& ci);

} // namespace ecx
