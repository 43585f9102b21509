#pragma once

// Random-state statistics on finite Hilbert spaces.
//
// A mixture of n_m wave functions in dimension n0 is stored as an n0 x n_m
// complex matrix c whose column l holds psi^l; the whole table is normalised
// so that sum_{i,l} |c_i^l|^2 = 1 and rho = sum_l |psi^l><psi^l|.
//
// Index convention for H0 = H_S (x) H_E: i = s + n_S * e (the subsystem index
// varies fastest). A further split H_S = H_A (x) H_B uses s = a + n_A * b.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cptkin/core_state.hpp"

namespace cptkin::typicality {

using Coefficients = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

/// Largest n0 = n_S * n_E accepted for dense sampling.
inline constexpr std::size_t kMaxDimension = 16384;

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, std::size_t required_bytes)
        : std::runtime_error(what), required_bytes_(required_bytes) {}
    std::size_t required_bytes() const noexcept { return required_bytes_; }

private:
    std::size_t required_bytes_;
};

/// Bytes held by one coefficient table of dimension n0 with n_m columns.
inline std::size_t coefficient_bytes(std::size_t n0, std::size_t n_m) {
    return n0 * n_m * sizeof(std::complex<double>);
}

inline void require_budget(std::size_t n0, std::size_t n_m) {
    if (n0 > kMaxDimension)
        throw BudgetExceeded("Hilbert dimension " + std::to_string(n0) + " exceeds the budget of " +
                                 std::to_string(kMaxDimension) + " (needs " +
                                 std::to_string(coefficient_bytes(n0, n_m)) + " bytes per sample)",
                             coefficient_bytes(n0, n_m));
}

struct RandomStateEnsemble {
    std::size_t n0 = 2;
    std::size_t n_m = 1;
    std::size_t n_samples = 1000;
    std::uint64_t seed = 1;
};

struct ObservableSpec {
    std::vector<double> eigenvalues;

    double trace() const noexcept {
        double s = 0.0;
        for (double g : eigenvalues) s += g;
        return s;
    }
    double trace_squared() const noexcept {
        double s = 0.0;
        for (double g : eigenvalues) s += g * g;
        return s;
    }

    static ObservableSpec identity(std::size_t n) { return {std::vector<double>(n, 1.0)}; }
    static ObservableSpec projector(std::size_t n, std::size_t index = 0) {
        ObservableSpec g{std::vector<double>(n, 0.0)};
        g.eigenvalues.at(index) = 1.0;
        return g;
    }
};

/// G (x) I on the extended space of dimension n0 * n_m, ordered like a
/// column-major flattening of the coefficient table.
inline ObservableSpec lift_observable(const ObservableSpec& g, std::size_t n_m) {
    ObservableSpec out;
    out.eigenvalues.reserve(g.eigenvalues.size() * n_m);
    for (std::size_t l = 0; l < n_m; ++l)
        out.eigenvalues.insert(out.eigenvalues.end(), g.eigenvalues.begin(), g.eigenvalues.end());
    return out;
}

/// Isotropic sample: independent complex Gaussian entries, then one global
/// normalisation.
inline Coefficients sample_random_state(std::size_t n, std::size_t n_m, std::mt19937_64& rng) {
    if (n < 1 || n_m < 1) throw InvalidInput("sample_random_state: dimensions must be at least 1");
    require_budget(n, n_m);
    std::normal_distribution<double> normal(0.0, 1.0);
    Coefficients c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_m));
    for (Eigen::Index l = 0; l < c.cols(); ++l)
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            c(i, l) = {re, im};
        }
    c /= c.norm();
    return c;
}

/// <G> = Tr[rho G] for a diagonal G; divided by Tr[rho] so that the
/// identity gives exactly 1.
inline double expectation(const ObservableSpec& g, const Coefficients& c) {
    if (g.eigenvalues.size() != static_cast<std::size_t>(c.rows()))
        throw InvalidInput("expectation: observable size does not match the state dimension");
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index l = 0; l < c.cols(); ++l)
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            const double p = std::norm(c(i, l));
            num += g.eigenvalues[static_cast<std::size_t>(i)] * p;
            den += p;
        }
    return num / den;
}

struct ObservableStatistics {
    double mean = 0.0;
    /// Root-mean-square fluctuation of <G> about its mean.
    double rms = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
    double predicted_mean = 0.0;
    /// Tr[G^2]^(1/2) / (n0 n_m^(1/2)); an order-of-magnitude scale.
    double predicted_rms_scale = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinimumSamples = 100;

inline ObservableStatistics observable_statistics(const ObservableSpec& g, const RandomStateEnsemble& ens) {
    if (g.eigenvalues.size() != ens.n0)
        throw InvalidInput("observable_statistics: eigenvalue list length must equal n0");
    if (ens.n0 < 1 || ens.n_m < 1 || ens.n_samples < 1)
        throw InvalidInput("observable_statistics: n0, n_m and n_samples must be at least 1");
    require_budget(ens.n0, ens.n_m);
    ObservableStatistics st;
    if (ens.n_samples < kMinimumSamples)
        st.warnings.push_back("only " + std::to_string(ens.n_samples) + " samples; at least " +
                              std::to_string(kMinimumSamples) + " are recommended");
    std::mt19937_64 rng(ens.seed);
    // Welford accumulation.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < ens.n_samples; ++s) {
        const double x = expectation(g, sample_random_state(ens.n0, ens.n_m, rng));
        const double d = x - mean;
        mean += d / static_cast<double>(s + 1);
        m2 += d * (x - mean);
    }
    const double n = static_cast<double>(ens.n_samples);
    st.samples = ens.n_samples;
    st.mean = mean;
    st.rms = std::sqrt(m2 / n);
    st.standard_error = ens.n_samples > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    st.predicted_mean = g.trace() / static_cast<double>(ens.n0);
    st.predicted_rms_scale =
        std::sqrt(g.trace_squared()) / (static_cast<double>(ens.n0) * std::sqrt(static_cast<double>(ens.n_m)));
    return st;
}

struct SubsystemSplit {
    std::size_t n_s = 2;
    std::size_t n_e = 1;
    std::size_t n0() const noexcept { return n_s * n_e; }
};

/// rho_S = Tr_E[rho], normalised to unit trace.
inline DensityMatrix reduced_density_matrix(const Coefficients& c, const SubsystemSplit& split) {
    if (split.n_s < 1 || split.n_e < 1) throw InvalidInput("reduced_density_matrix: empty subsystem");
    if (static_cast<std::size_t>(c.rows()) != split.n0())
        throw InvalidInput("reduced_density_matrix: n_S * n_E = " + std::to_string(split.n0()) +
                           " does not match the state dimension " + std::to_string(c.rows()));
    const auto ns = static_cast<Eigen::Index>(split.n_s);
    const auto ne = static_cast<Eigen::Index>(split.n_e);
    DensityMatrix rho = DensityMatrix::Zero(ns, ns);
    for (Eigen::Index l = 0; l < c.cols(); ++l) {
        // Column-major map: m(s, e) = c(s + n_S e, l).
        Eigen::Map<const Eigen::MatrixXcd> m(c.col(l).data(), ns, ne);
        rho.noalias() += m * m.adjoint();
    }
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw InvalidInput("reduced_density_matrix: state has zero norm");
    rho /= tr;
    return rho;
}

struct DensityCheck {
    bool hermitian = false;
    bool unit_trace = false;
    bool positive = false;
    double min_eigenvalue = 0.0;
    bool ok() const noexcept { return hermitian && unit_trace && positive; }
};

inline DensityCheck check_density_matrix(const DensityMatrix& rho, double tol = 1e-10) {
    DensityCheck d;
    d.hermitian = (rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol;
    d.unit_trace = std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) <= tol;
    const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    d.positive = d.min_eigenvalue >= -tol;
    return d;
}

/// Partial traces of rho_AB over B and over A, with s = a + n_A b.
inline DensityMatrix trace_out_b(const DensityMatrix& rho_ab, std::size_t n_a, std::size_t n_b) {
    const auto na = static_cast<Eigen::Index>(n_a);
    const auto nb = static_cast<Eigen::Index>(n_b);
    DensityMatrix r = DensityMatrix::Zero(na, na);
    for (Eigen::Index b = 0; b < nb; ++b) r += rho_ab.block(b * na, b * na, na, na);
    return r;
}

inline DensityMatrix trace_out_a(const DensityMatrix& rho_ab, std::size_t n_a, std::size_t n_b) {
    const auto na = static_cast<Eigen::Index>(n_a);
    const auto nb = static_cast<Eigen::Index>(n_b);
    DensityMatrix r = DensityMatrix::Zero(nb, nb);
    for (Eigen::Index b = 0; b < nb; ++b)
        for (Eigen::Index bp = 0; bp < nb; ++bp)
            for (Eigen::Index a = 0; a < na; ++a) r(b, bp) += rho_ab(a + na * b, a + na * bp);
    return r;
}

/// rho_A (x) rho_B in the s = a + n_A b ordering.
inline DensityMatrix product_state(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
    const Eigen::Index na = rho_a.rows();
    const Eigen::Index nb = rho_b.rows();
    DensityMatrix out(na * nb, na * nb);
    for (Eigen::Index b = 0; b < nb; ++b)
        for (Eigen::Index bp = 0; bp < nb; ++bp)
            out.block(b * na, bp * na, na, na) = rho_b(b, bp) * rho_a;
    return out;
}

/// ||rho_AB - rho_A (x) rho_B||_F for a given two-particle density matrix.
inline double factorization_deviation(const DensityMatrix& rho_ab, std::size_t n_a, std::size_t n_b) {
    if (n_a < 1 || n_b < 1 || rho_ab.rows() != static_cast<Eigen::Index>(n_a * n_b) ||
        rho_ab.cols() != rho_ab.rows())
        throw InvalidInput("factorization_deviation: n_A * n_B does not match the density matrix");
    const auto rho_a = trace_out_b(rho_ab, n_a, n_b);
    const auto rho_b = trace_out_a(rho_ab, n_a, n_b);
    return (rho_ab - product_state(rho_a, rho_b)).norm();
}

inline double factorization_deviation(const Coefficients& c, std::size_t n_a, std::size_t n_b, std::size_t n_e) {
    if (static_cast<std::size_t>(c.rows()) != n_a * n_b * n_e)
        throw InvalidInput("factorization_deviation: n_A * n_B * n_E does not match the state dimension");
    return factorization_deviation(reduced_density_matrix(c, {n_a * n_b, n_e}), n_a, n_b);
}

struct ConvergenceRow {
    std::size_t n_e = 0;
    std::size_t n_m = 1;
    std::size_t samples = 0;
    /// Mean and standard error of every entry rho_S(k, j); real and
    /// imaginary parts are tracked separately.
    Eigen::MatrixXcd mean;
    Eigen::MatrixXd stderr_re;
    Eigen::MatrixXd stderr_im;
    /// sqrt(Mean |rho_S(k, j) - delta_kj / n_S|^2) over samples and entries.
    double rms = 0.0;
    /// n_S^-1 n_E^-1/2 n_m^-1/2, the predicted order of rms.
    double predicted_scale = 0.0;
};

struct ConvergenceTable {
    std::size_t n_s = 2;
    std::vector<ConvergenceRow> rows;
    /// Least-squares slope of log rms against log n_E (NaN with one row).
    double slope = 0.0;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nan("");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    return sxy / sxx;
}

/// Empirical statistics of rho_S for each environment size. Every row uses
/// its own stream derived from (seed, n_E, n_m).
inline ConvergenceTable typicality_convergence(std::size_t n_s, const std::vector<std::size_t>& n_e_list,
                                               std::size_t n_m, std::size_t n_samples, std::uint64_t seed) {
    if (n_s < 1 || n_m < 1 || n_samples < 2) throw InvalidInput("typicality_convergence: invalid sizes");
    if (n_e_list.empty()) throw InvalidInput("typicality_convergence: empty n_E list");
    for (auto ne : n_e_list) {
        if (ne < 1) throw InvalidInput("typicality_convergence: n_E must be at least 1");
        require_budget(n_s * ne, n_m);
    }
    ConvergenceTable table;
    table.n_s = n_s;
    const auto ns = static_cast<Eigen::Index>(n_s);
    const double n = static_cast<double>(n_samples);
    for (auto ne : n_e_list) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(ne), static_cast<std::uint32_t>(n_m)};
        std::mt19937_64 rng(seq);
        Eigen::MatrixXd mean_re = Eigen::MatrixXd::Zero(ns, ns), mean_im = mean_re;
        Eigen::MatrixXd m2_re = mean_re, m2_im = mean_re;
        double sq = 0.0;
        const Eigen::MatrixXcd target = Eigen::MatrixXcd::Identity(ns, ns) / static_cast<double>(n_s);
        for (std::size_t s = 0; s < n_samples; ++s) {
            const auto rho = reduced_density_matrix(sample_random_state(n_s * ne, n_m, rng), {n_s, ne});
            const double k = static_cast<double>(s + 1);
            const Eigen::MatrixXd re = rho.real();
            const Eigen::MatrixXd im = rho.imag();
            const Eigen::MatrixXd d_re = re - mean_re;
            const Eigen::MatrixXd d_im = im - mean_im;
            mean_re += d_re / k;
            mean_im += d_im / k;
            m2_re += d_re.cwiseProduct(re - mean_re);
            m2_im += d_im.cwiseProduct(im - mean_im);
            sq += (rho - target).squaredNorm();
        }
        ConvergenceRow row;
        row.n_e = ne;
        row.n_m = n_m;
        row.samples = n_samples;
        row.mean = mean_re.cast<std::complex<double>>() + std::complex<double>(0, 1) * mean_im.cast<std::complex<double>>();
        row.stderr_re = (m2_re / (n - 1.0) / n).cwiseSqrt();
        row.stderr_im = (m2_im / (n - 1.0) / n).cwiseSqrt();
        row.rms = std::sqrt(sq / (n * static_cast<double>(n_s * n_s)));
        row.predicted_scale = 1.0 / (static_cast<double>(n_s) * std::sqrt(static_cast<double>(ne) * static_cast<double>(n_m)));
        table.rows.push_back(std::move(row));
    }
    std::vector<double> xs, ys;
    for (const auto& r : table.rows) {
        xs.push_back(static_cast<double>(r.n_e));
        ys.push_back(r.rms);
    }
    table.slope = loglog_slope(xs, ys);
    return table;
}

}  // namespace cptkin::typicality
