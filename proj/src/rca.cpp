#include "ecx/rca.hpp"

#include "ecx/csv.hpp"
#include "ecx/error.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>

namespace ecx {

RcaMatrix compute_rca(const SalesMatrix& sales)
{
    const auto& w = sales.values;
    if (w.rows() == 0 || w.cols() == 0 || (w.array() == 0.0).all()) {
        throw InputError("empty economy");
    }
    if ((w.array() < 0.0).any() || !w.allFinite()) {
        throw InputError("sales must be finite and nonnegative");
    }

    RcaMatrix out;
    std::vector<std::size_t> keep_rows;
    std::vector<std::size_t> keep_cols;
    for (Eigen::Index p = 0; p < w.rows(); ++p) {
        if ((w.row(p).array() == 0.0).all()) {
            out.dropped.rows.push_back({sales.regions[static_cast<std::size_t>(p)].code, "zero total sales"});
        } else {
            keep_rows.push_back(static_cast<std::size_t>(p));
        }
    }
    for (Eigen::Index s = 0; s < w.cols(); ++s) {
        if ((w.col(s).array() == 0.0).all()) {
            out.dropped.columns.push_back({sales.sectors[static_cast<std::size_t>(s)].code, "zero total sales"});
        } else {
            keep_cols.push_back(static_cast<std::size_t>(s));
        }
    }
    out.regions = sales.regions.subset(keep_rows);
    out.sectors = sales.sectors.subset(keep_cols);

    const auto P = static_cast<Eigen::Index>(keep_rows.size());
    const auto S = static_cast<Eigen::Index>(keep_cols.size());
    Eigen::MatrixXd kw(P, S);
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index s = 0; s < S; ++s) {
            kw(p, s) = w(static_cast<Eigen::Index>(keep_rows[static_cast<std::size_t>(p)]),
                         static_cast<Eigen::Index>(keep_cols[static_cast<std::size_t>(s)]));
        }
    }

    Eigen::VectorXd row_total = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd col_total = Eigen::VectorXd::Zero(S);
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index s = 0; s < S; ++s) {
            row_total(p) += kw(p, s);
            col_total(s) += kw(p, s);
        }
    }
    double grand = 0;
    for (Eigen::Index p = 0; p < P; ++p) {
        grand += row_total(p);
    }

    out.values.resize(P, S);
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index s = 0; s < S; ++s) {
            out.values(p, s) = kw(p, s) == 0.0 ? 0.0 : (kw(p, s) / row_total(p)) / (col_total(s) / grand);
        }
    }
    return out;
}

BinaryBipartiteMatrix::BinaryBipartiteMatrix(BinaryMatrix values, RegionCatalog regions, SectorCatalog sectors,
                                             DropReport dropped)
    : values_(std::move(values)), regions_(std::move(regions)), sectors_(std::move(sectors)),
      dropped_(std::move(dropped))
{
    if (values_.rows() == 0 || values_.cols() == 0) {
        throw InputError("degenerate matrix");
    }
    if (static_cast<std::size_t>(values_.rows()) != regions_.size() ||
        static_cast<std::size_t>(values_.cols()) != sectors_.size()) {
        throw InputError("matrix dimensions do not match label catalogs");
    }
    if (((values_.array() != 0) && (values_.array() != 1)).any()) {
        throw InputError("bipartite matrix entries must be 0 or 1");
    }
    for (Eigen::Index p = 0; p < values_.rows(); ++p) {
        if (values_.row(p).sum() == 0) {
            throw InputError(fmt::format("zero degree for region '{}'", regions_[static_cast<std::size_t>(p)].code));
        }
    }
    for (Eigen::Index s = 0; s < values_.cols(); ++s) {
        if (values_.col(s).sum() == 0) {
            throw InputError(fmt::format("zero degree for sector '{}'", sectors_[static_cast<std::size_t>(s)].code));
        }
    }
}

BinaryBipartiteMatrix BinaryBipartiteMatrix::from_rows(const std::vector<std::vector<int>>& rows)
{
    if (rows.empty() || rows.front().empty()) {
        throw InputError("degenerate matrix");
    }
    BinaryMatrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t p = 0; p < rows.size(); ++p) {
        if (rows[p].size() != rows.front().size()) {
            throw InputError("ragged matrix rows");
        }
        for (std::size_t s = 0; s < rows[p].size(); ++s) {
            v(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(s)) = rows[p][s];
        }
    }
    return BinaryBipartiteMatrix(std::move(v), RegionCatalog::with_default_labels(rows.size()),
                                 SectorCatalog::with_default_labels(rows.front().size()));
}

std::size_t BinaryBipartiteMatrix::ones() const
{
    return static_cast<std::size_t>(values_.sum());
}

BinaryBipartiteMatrix BinaryBipartiteMatrix::permuted(const std::vector<std::size_t>& row_perm,
                                                      const std::vector<std::size_t>& col_perm) const
{
    BinaryMatrix v(rows(), cols());
    for (Eigen::Index i = 0; i < rows(); ++i) {
        for (Eigen::Index j = 0; j < cols(); ++j) {
            v(i, j) = values_(static_cast<Eigen::Index>(row_perm.at(static_cast<std::size_t>(i))),
                              static_cast<Eigen::Index>(col_perm.at(static_cast<std::size_t>(j))));
        }
    }
    return BinaryBipartiteMatrix(std::move(v), regions_.subset(row_perm), sectors_.subset(col_perm), dropped_);
}

BinaryBipartiteMatrix binarize(const RcaMatrix& rca, double threshold)
{
    if (!(threshold > 0)) {
        throw InputError("threshold must be positive");
    }
    const auto& r = rca.values;
    BinaryMatrix full = (r.array() >= threshold).cast<int>();

    DropReport dropped = rca.dropped;
    std::vector<std::size_t> keep_rows;
    std::vector<std::size_t> keep_cols;
    for (Eigen::Index p = 0; p < full.rows(); ++p) {
        if (full.row(p).sum() == 0) {
            dropped.rows.push_back({rca.regions[static_cast<std::size_t>(p)].code, "no RCA above threshold"});
        } else {
            keep_rows.push_back(static_cast<std::size_t>(p));
        }
    }
    for (Eigen::Index s = 0; s < full.cols(); ++s) {
        if (full.col(s).sum() == 0) {
            dropped.columns.push_back({rca.sectors[static_cast<std::size_t>(s)].code, "no RCA above threshold"});
        } else {
            keep_cols.push_back(static_cast<std::size_t>(s));
        }
    }
    if (keep_rows.empty() || keep_cols.empty()) {
        throw InputError("degenerate matrix");
    }
    BinaryMatrix v(static_cast<Eigen::Index>(keep_rows.size()), static_cast<Eigen::Index>(keep_cols.size()));
    for (std::size_t i = 0; i < keep_rows.size(); ++i) {
        for (std::size_t j = 0; j < keep_cols.size(); ++j) {
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                full(static_cast<Eigen::Index>(keep_rows[i]), static_cast<Eigen::Index>(keep_cols[j]));
        }
    }
    return BinaryBipartiteMatrix(std::move(v), rca.regions.subset(keep_rows), rca.sectors.subset(keep_cols),
                                 std::move(dropped));
}

DegreeProfile degree_profile(const BinaryBipartiteMatrix& m)
{
    const auto& v = m.values();
    DegreeProfile d;
    d.k_p0 = v.rowwise().sum();
    d.k_s0 = v.colwise().sum().transpose();
    d.k_p1.resize(v.rows());
    d.k_s1.resize(v.cols());
    for (Eigen::Index p = 0; p < v.rows(); ++p) {
        double acc = 0;
        for (Eigen::Index s = 0; s < v.cols(); ++s) {
            acc += v(p, s) * d.k_s0(s);
        }
        d.k_p1(p) = acc / d.k_p0(p);
    }
    for (Eigen::Index s = 0; s < v.cols(); ++s) {
        double acc = 0;
        for (Eigen::Index p = 0; p < v.rows(); ++p) {
            acc += v(p, s) * d.k_p0(p);
        }
        d.k_s1(s) = acc / d.k_s0(s);
    }
    d.mean_k_p0 = d.k_p0.cast<double>().mean();
    d.mean_k_p1 = d.k_p1.mean();
    return d;
}

namespace {

template <typename Matrix, typename Format>
void write_labelled(std::ostream& out, const Matrix& values, const RegionCatalog& regions,
                    const SectorCatalog& sectors, Format format)
{
    csv::Row header{"region_code"};
    for (const auto& code : sectors.codes()) {
        header.push_back(code);
    }
    csv::write_row(out, header);
    for (Eigen::Index p = 0; p < values.rows(); ++p) {
        csv::Row row{regions[static_cast<std::size_t>(p)].code};
        for (Eigen::Index s = 0; s < values.cols(); ++s) {
            row.push_back(format(values(p, s)));
        }
        csv::write_row(out, row);
    }
}

} // namespace

void write_rca_csv(std::ostream& out, const RcaMatrix& rca)
{
    write_labelled(out, rca.values, rca.regions, rca.sectors, [](double v) { return csv::format_double(v); });
}

void write_matrix_csv(std::ostream& out, const BinaryBipartiteMatrix& m)
{
    write_labelled(out, m.values(), m.regions(), m.sectors(), [](int v) { return std::string(v ? "1" : "0"); });
}

BinaryBipartiteMatrix read_matrix_csv(std::istream& in, const RegionCatalog& regions, const SectorCatalog& sectors)
{
    if (!in) {
        throw IoError("matrix: unreadable stream");
    }
    csv::Reader reader(in);
    csv::Row header;
    if (!reader.next(header) || header.empty() || csv::trim(header[0]) != "region_code") {
        throw InputError("matrix.csv: bad header");
    }
    std::vector<std::size_t> cols;
    for (std::size_t j = 1; j < header.size(); ++j) {
        const auto s = sectors.find(csv::trim(header[j]));
        if (!s) {
            throw InputError(fmt::format("matrix.csv: unknown sector '{}'", header[j]));
        }
        cols.push_back(*s);
    }
    std::vector<std::size_t> rows;
    std::vector<std::vector<int>> cells;
    csv::Row row;
    while (reader.next(row)) {
        if (row.size() != header.size()) {
            throw InputError(fmt::format("matrix.csv line {}: wrong field count", reader.line()));
        }
        const auto p = regions.find(csv::trim(row[0]));
        if (!p) {
            throw InputError(fmt::format("matrix.csv line {}: unknown region '{}'", reader.line(), row[0]));
        }
        rows.push_back(*p);
        auto& r = cells.emplace_back();
        for (std::size_t j = 1; j < row.size(); ++j) {
            const auto t = csv::trim(row[j]);
            if (t != "0" && t != "1") {
                throw InputError(fmt::format("matrix.csv line {}: entries must be 0 or 1", reader.line()));
            }
            r.push_back(t == "1");
        }
    }
    BinaryMatrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i][j];
        }
    }
    return BinaryBipartiteMatrix(std::move(v), regions.subset(rows), sectors.subset(cols));
}

} // namespace ecx
