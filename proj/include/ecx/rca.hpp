#pragma once

// Revealed comparative advantage, binarization into the region x sector
// bipartite matrix M, and degree profiles.

#include "ecx/ingest.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace ecx {

struct DroppedLabel {
    std::string code;
    std::string reason;
};

// Rows/columns removed on the way from sales to M, by stage.
struct DropReport {
    std::vector<DroppedLabel> rows;
    std::vector<DroppedLabel> columns;

    bool empty() const { return rows.empty() && columns.empty(); }
};

struct RcaMatrix {
    Eigen::MatrixXd values;
    RegionCatalog regions;
    SectorCatalog sectors;
    DropReport dropped; // zero-total rows/columns removed before the ratio
};

// RCA_ps = (w_ps / sum_s w_ps) / (sum_p w_ps / sum_ps w_ps).
// Regions or sectors with zero total sales are dropped first and reported.
// Entries with w_ps == 0 are exactly 0. Throws InputError("empty economy")
// when every entry is zero.
RcaMatrix compute_rca(const SalesMatrix& sales);

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// 0/1 region x sector matrix with no all-zero rows or columns.
class BinaryBipartiteMatrix {
public:
    // Validates entries in {0,1}, label counts and the absence of zero rows/columns.
    BinaryBipartiteMatrix(BinaryMatrix values, RegionCatalog regions, SectorCatalog sectors,
                          DropReport dropped = {});

    // Convenience for matrices written inline: rows of 0/1, labels R01.., S01...
    static BinaryBipartiteMatrix from_rows(const std::vector<std::vector<int>>& rows);

    const BinaryMatrix& values() const { return values_; }
    const RegionCatalog& regions() const { return regions_; }
    const SectorCatalog& sectors() const { return sectors_; }
    const DropReport& dropped() const { return dropped_; }
    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }
    int operator()(Eigen::Index p, Eigen::Index s) const { return values_(p, s); }
    std::size_t ones() const;

    // M with rows and columns re-ordered; perm[i] is the source index placed at i.
    BinaryBipartiteMatrix permuted(const std::vector<std::size_t>& row_perm,
                                   const std::vector<std::size_t>& col_perm) const;

private:
    BinaryMatrix values_;
    RegionCatalog regions_;
    SectorCatalog sectors_;
    DropReport dropped_;
};

// M_ps = 1 iff RCA_ps >= threshold. All-zero rows/columns are dropped and
// reported together with the drops inherited from the RCA stage.
// Throws InputError("degenerate matrix") when nothing is left.
BinaryBipartiteMatrix binarize(const RcaMatrix& rca, double threshold = 1.0);

struct DegreeProfile {
    Eigen::VectorXi k_p0; // diversification
    Eigen::VectorXi k_s0; // ubiquity
    Eigen::VectorXd k_p1; // mean ubiquity of a region's sectors
    Eigen::VectorXd k_s1; // mean diversification of a sector's regions
    double mean_k_p0 = 0;
    double mean_k_p1 = 0;
};

DegreeProfile degree_profile(const BinaryBipartiteMatrix& m);

// Canonical matrix CSV: region codes first column, sector codes in the header.
void write_rca_csv(std::ostream& out, const RcaMatrix& rca);
void write_matrix_csv(std::ostream& out, const BinaryBipartiteMatrix& m);
// Labels are resolved against the (full) catalogs; the result carries
// sub-catalogs in file order.
BinaryBipartiteMatrix read_matrix_csv(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors);

} // namespace ecx
