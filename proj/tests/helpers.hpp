#pragma once

#include "ecx/ingest.hpp"
#include "ecx/rca.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline ecx::RegionCatalog regions(std::vector<std::string> codes, std::string super_region = "Kanto")
{
    std::vector<ecx::Region> r;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        r.push_back({i, codes[i], "name " + codes[i], super_region});
    }
    return ecx::RegionCatalog(std::move(r));
}

inline ecx::SectorCatalog sectors(std::vector<std::string> codes, std::vector<std::string> excluded = {})
{
    std::vector<ecx::Sector> s;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const bool ex = std::find(excluded.begin(), excluded.end(), codes[i]) != excluded.end();
        s.push_back({i, codes[i], "sector " + codes[i], "Division", ex});
    }
    return ecx::SectorCatalog(std::move(s));
}

inline ecx::BinaryBipartiteMatrix matrix(const oracle::Matrix01& rows)
{
    return ecx::BinaryBipartiteMatrix::from_rows(rows);
}

inline oracle::Matrix01 rows_of(const ecx::BinaryBipartiteMatrix& m)
{
    oracle::Matrix01 out(static_cast<std::size_t>(m.rows()), std::vector<int>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index p = 0; p < m.rows(); ++p) {
        for (Eigen::Index s = 0; s < m.cols(); ++s) {
            out[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)] = m(p, s);
        }
    }
    return out;
}

inline ecx::SalesMatrix sales(const std::vector<std::vector<double>>& w)
{
    Eigen::MatrixXd v(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.front().size()));
    for (std::size_t p = 0; p < w.size(); ++p) {
        for (std::size_t s = 0; s < w[p].size(); ++s) {
            v(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(s)) = w[p][s];
        }
    }
    return {v, ecx::RegionCatalog::with_default_labels(w.size()), ecx::SectorCatalog::with_default_labels(w.front().size())};
}

} // namespace testing
