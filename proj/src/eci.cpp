#include "ecx/eci.hpp"

#include "ecx/error.hpp"
#include "ecx/ranking.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace ecx {

std::string_view entity_name(Entity kind)
{
    return kind == Entity::region ? "region" : "sector";
}

Entity parse_entity(std::string_view name)
{
    if (name == "region") {
        return Entity::region;
    }
    if (name == "sector") {
        return Entity::sector;
    }
    throw InputError(fmt::format("unknown entity '{}' (expected region|sector)", name));
}

TransitionMatrix build_transition(const BinaryBipartiteMatrix& m, Entity kind)
{
    const Eigen::MatrixXd a = m.values().cast<double>();
    const Eigen::VectorXd kp = a.rowwise().sum();
    const Eigen::VectorXd ks = a.colwise().sum().transpose();
    for (Eigen::Index p = 0; p < kp.size(); ++p) {
        if (kp(p) == 0) {
            throw InputError(fmt::format("zero degree for region '{}'", m.regions()[static_cast<std::size_t>(p)].code));
        }
    }
    for (Eigen::Index s = 0; s < ks.size(); ++s) {
        if (ks(s) == 0) {
            throw InputError(fmt::format("zero degree for sector '{}'", m.sectors()[static_cast<std::size_t>(s)].code));
        }
    }

    TransitionMatrix t;
    t.kind = kind;
    if (kind == Entity::region) {
        // P(s|p) P(p'|s)
        const Eigen::MatrixXd from = kp.cwiseInverse().asDiagonal() * a;
        const Eigen::MatrixXd to = a * ks.cwiseInverse().asDiagonal();
        t.values = from * to.transpose();
        t.labels = m.regions().codes();
    } else {
        const Eigen::MatrixXd from = ks.cwiseInverse().asDiagonal() * a.transpose();
        const Eigen::MatrixXd to = kp.cwiseInverse().asDiagonal() * a;
        t.values = from * to;
        t.labels = m.sectors().codes();
    }
    return t;
}

namespace {

void check_stochastic(const TransitionMatrix& t)
{
    const auto& v = t.values;
    if (v.rows() != v.cols() || v.rows() == 0) {
        throw InputError("transition matrix must be square and non-empty");
    }
    if (!v.allFinite() || (v.array() < 0.0).any()) {
        throw InputError("transition matrix entries must be finite and nonnegative");
    }
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        if (std::abs(v.row(i).sum() - 1.0) > 1e-9) {
            throw InputError(fmt::format("transition matrix row {} does not sum to 1", i));
        }
    }
}

[[noreturn]] void degenerate(double a, double b)
{
    throw NumericalError(fmt::format("degenerate spectrum: eigenvalues {:.17g} and {:.17g} coincide", a, b));
}

void check_spectrum(std::complex<double> l1, std::complex<double> l2, std::optional<std::complex<double>> l3,
                    double tol)
{
    if (std::abs(l1 - l2) < tol) {
        degenerate(l1.real(), l2.real());
    }
    if (l3 && std::abs(l2 - *l3) < tol) {
        degenerate(l2.real(), l3->real());
    }
    if (std::abs(l2.imag()) >= 1e-10) {
        throw NumericalError(
            fmt::format("second eigenvalue is complex ({:.17g} {:+.3g}i)", l2.real(), l2.imag()));
    }
}

double residual(const Eigen::MatrixXd& t, const Eigen::VectorXd& v, double lambda)
{
    return (t * v - lambda * v).lpNorm<Eigen::Infinity>();
}

std::vector<Eigen::Index> by_real_part_desc(const Eigen::VectorXcd& ev)
{
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (ev(a).real() != ev(b).real()) {
            return ev(a).real() > ev(b).real();
        }
        return ev(a).imag() > ev(b).imag();
    });
    return idx;
}

EigenPair dense_pair(const TransitionMatrix& t, const EigenOptions& options)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(t.values, true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense eigendecomposition failed");
    }
    const Eigen::VectorXcd ev = solver.eigenvalues();
    const auto order = by_real_part_desc(ev);
    std::optional<std::complex<double>> l3;
    if (order.size() > 2) {
        l3 = ev(order[2]);
    }
    check_spectrum(ev(order[0]), ev(order[1]), l3, options.tol);

    EigenPair pair;
    pair.eigenvalue = ev(order[1]).real();
    pair.leading_eigenvalue = ev(order[0]).real();
    if (l3) {
        pair.third_eigenvalue = l3->real();
    }
    pair.eigenvector = solver.eigenvectors().col(order[1]).real();
    pair.eigenvector.normalize();
    pair.residual_norm = residual(t.values, pair.eigenvector, pair.eigenvalue);
    pair.dense = true;
    return pair;
}

// Orthonormalizes the columns in place (modified Gram-Schmidt, two passes).
void orthonormalize(Eigen::MatrixXd& x)
{
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < j; ++k) {
                x.col(j) -= x.col(k).dot(x.col(j)) * x.col(k);
            }
        }
        const double norm = x.col(j).norm();
        if (norm < 1e-300) {
            throw NumericalError("subspace iteration lost rank");
        }
        x.col(j) /= norm;
    }
}

// Stationary distribution pi (pi^T T = pi^T) by power iteration on the lazy chain.
Eigen::VectorXd left_perron(const Eigen::MatrixXd& t, const EigenOptions& options)
{
    const auto n = t.rows();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < options.max_iter; ++it) {
        Eigen::VectorXd next = 0.5 * (t.transpose() * pi + pi);
        next /= next.sum();
        const double change = (next - pi).lpNorm<Eigen::Infinity>();
        pi = std::move(next);
        if (change < 1e-15) {
            return pi;
        }
    }
    throw NumericalError("stationary distribution did not converge");
}

EigenPair iterative_pair(const TransitionMatrix& t, const EigenOptions& options)
{
    const auto& T = t.values;
    const auto n = T.rows();
    const Eigen::VectorXd pi = left_perron(T, options);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    // Removes the leading (lambda = 1, uniform) component; the complement
    // {v : pi^T v = 0} is invariant under T.
    auto deflate = [&](Eigen::MatrixXd& x) { x -= ones * (pi.transpose() * x); };

    const Eigen::Index block = std::min<Eigen::Index>(n - 1, 4);
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
        for (Eigen::Index j = 1; j < block; ++j) {
            x(i, j) = std::cos(M_PI * static_cast<double>(j) * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
        }
    }
    deflate(x);
    orthonormalize(x);

    EigenPair pair;
    pair.dense = false;
    pair.leading_eigenvalue = 1.0;
    double last_residual = 0;
    for (int it = 1; it <= options.max_iter; ++it) {
        // Shifted operator (T + I)/2 keeps the eigenvalue ordering by real part
        // for spectra inside the unit disc.
        Eigen::MatrixXd y = 0.5 * (T * x + x);
        deflate(y);
        orthonormalize(y);
        x = std::move(y);

        const Eigen::MatrixXd tx = T * x;
        const Eigen::MatrixXd h = x.transpose() * tx;
        Eigen::EigenSolver<Eigen::MatrixXd> ritz(h, true);
        const Eigen::VectorXcd mu = ritz.eigenvalues();
        const auto order = by_real_part_desc(mu);

        auto ritz_vector = [&](Eigen::Index k) {
            Eigen::VectorXd v = x * ritz.eigenvectors().col(order[static_cast<std::size_t>(k)]).real();
            return Eigen::VectorXd(v.normalized());
        };
        const Eigen::VectorXd v2 = ritz_vector(0);
        const double l2 = mu(order[0]).real();
        const double r2 = residual(T, v2, l2);
        double r3 = 0;
        if (block > 1) {
            r3 = residual(T, ritz_vector(1), mu(order[1]).real());
        }
        last_residual = r2;
        if (r2 < options.tol && r3 < options.tol) {
            std::optional<std::complex<double>> l3;
            if (block > 1) {
                l3 = mu(order[1]);
            }
            check_spectrum({1.0, 0.0}, mu(order[0]), l3, options.tol);
            pair.eigenvalue = l2;
            pair.eigenvector = v2;
            pair.residual_norm = r2;
            if (l3) {
                pair.third_eigenvalue = l3->real();
            }
            pair.iterations = it;
            return pair;
        }
    }
    throw NumericalError(fmt::format("second eigenpair did not converge after {} iterations (residual {:.3g})",
                                     options.max_iter, last_residual));
}

} // namespace

EigenPair second_eigenpair(const TransitionMatrix& t, const EigenOptions& options)
{
    if (!(options.tol > 0) || options.max_iter <= 0) {
        throw InputError("eigen tolerance and max_iter must be positive");
    }
    check_stochastic(t);
    if (t.values.rows() < 2) {
        throw NumericalError("degenerate spectrum: a single node has no second eigenvalue");
    }
    if (t.values.rows() <= options.dense_limit) {
        return dense_pair(t, options);
    }
    return iterative_pair(t, options);
}

Eigen::VectorXd standardize(const Eigen::VectorXd& v)
{
    const double mean = v.mean();
    const Eigen::VectorXd centered = v.array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(v.size()));
    if (!(sd > 0)) {
        throw NumericalError("zero variance eigenvector");
    }
    return centered / sd;
}

namespace {

// Flips v so that it correlates non-negatively with reference. Falls back to
// making the first non-negligible component positive when uncorrelated.
void fix_sign(Eigen::VectorXd& v, const Eigen::VectorXd& reference)
{
    const Eigen::VectorXd ref = reference.array() - reference.mean();
    const double cov = v.dot(ref);
    const double scale = v.lpNorm<1>() * ref.lpNorm<Eigen::Infinity>();
    if (std::abs(cov) > 1e-12 * scale) {
        if (cov < 0) {
            v = -v;
        }
        return;
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0) {
                v = -v;
            }
            return;
        }
    }
}

} // namespace

ComplexityIndices compute_indices(const BinaryBipartiteMatrix& m, const EigenOptions& options)
{
    const auto profile = degree_profile(m);
    ComplexityIndices ci;
    ci.region = second_eigenpair(build_transition(m, Entity::region), options);
    ci.sector = second_eigenpair(build_transition(m, Entity::sector), options);

    ci.eci = standardize(ci.region.eigenvector);
    fix_sign(ci.eci, profile.k_p0.cast<double>());
    ci.pci = standardize(ci.sector.eigenvector);
    fix_sign(ci.pci, -profile.k_s0.cast<double>());

    ci.second_eigenvalue_region = ci.region.eigenvalue;
    ci.second_eigenvalue_sector = ci.sector.eigenvalue;
    ci.spectral_gap = ci.region.leading_eigenvalue - ci.region.eigenvalue;
    return ci;
}

void write_eci_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const ComplexityIndices& ci)
{
    const auto labels = m.regions().codes();
    write_score_csv(out, "region_code", "eci", labels, std::span<const double>(ci.eci.data(), labels.size()));
}

void write_pci_csv(std::ostream& out, const BinaryBipartiteMatrix& m, const ComplexityIndices& ci)
{
    const auto labels = m.sectors().codes();
    write_score_csv(out, "sector_code", "pci", labels, std::span<const double>(ci.pci.data(), labels.size()));
}

} // namespace ecx
