#include <catch_amalgamated.hpp>

#include <cmath>

#include "cptkin/typicality.hpp"

using namespace cptkin;
using namespace cptkin::typicality;
using Catch::Approx;

namespace {

// Independent partial trace straight from the definition.
Eigen::MatrixXcd naive_partial_trace(const Coefficients& c, std::size_t n_s, std::size_t n_e) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n_s, n_s);
    for (Eigen::Index l = 0; l < c.cols(); ++l)
        for (std::size_t k = 0; k < n_s; ++k)
            for (std::size_t j = 0; j < n_s; ++j)
                for (std::size_t e = 0; e < n_e; ++e)
                    r(k, j) += c(k + n_s * e, l) * std::conj(c(j + n_s * e, l));
    return r / r.trace();
}

Coefficients product(const Eigen::VectorXcd& s, const Eigen::VectorXcd& e) {
    Coefficients c(s.size() * e.size(), 1);
    for (Eigen::Index ei = 0; ei < e.size(); ++ei)
        for (Eigen::Index si = 0; si < s.size(); ++si) c(si + s.size() * ei, 0) = s(si) * e(ei);
    return c;
}

}  // namespace

TEST_CASE("sampled states are normalised and deterministic") {
    std::mt19937_64 rng(1);
    const auto one = sample_random_state(1, 1, rng);
    CHECK(std::abs(one(0, 0)) == Approx(1.0).epsilon(1e-15));

    const auto c = sample_random_state(50, 3, rng);
    CHECK(c.squaredNorm() == Approx(1.0).epsilon(1e-14));

    std::mt19937_64 a(9), b(9), d(10);
    const auto ca = sample_random_state(16, 2, a);
    const auto cb = sample_random_state(16, 2, b);
    const auto cd = sample_random_state(16, 2, d);
    CHECK(ca == cb);
    CHECK_FALSE(ca == cd);
    CHECK_THROWS_AS(sample_random_state(0, 1, rng), InvalidInput);
}

TEST_CASE("sampling is isotropic") {
    const std::size_t n = 8, n_m = 2, samples = 10'000;
    std::mt19937_64 rng(4);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n_m), m2 = mean;
    for (std::size_t s = 0; s < samples; ++s) {
        const Eigen::MatrixXd p = sample_random_state(n, n_m, rng).cwiseAbs2();
        const Eigen::MatrixXd d = p - mean;
        mean += d / static_cast<double>(s + 1);
        m2 += d.cwiseProduct(p - mean);
    }
    const double expected = 1.0 / (n * n_m);
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double se = std::sqrt(m2(i) / (samples - 1.0) / samples);
        CHECK(std::abs(mean(i) - expected) < 3.0 * se);
    }
}

TEST_CASE("identity observable gives exactly one with no spread") {
    for (std::size_t n0 : {1u, 2u, 17u, 128u})
        for (std::size_t n_m : {1u, 3u}) {
            const auto st = observable_statistics(ObservableSpec::identity(n0), {n0, n_m, 200, 5});
            CHECK(st.mean == 1.0);
            CHECK(st.rms == 0.0);
        }
}

TEST_CASE("mean observable value is Tr G / n0") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    ObservableSpec g;
    for (int i = 0; i < 32; ++i) g.eigenvalues.push_back(u(rng));
    const auto st = observable_statistics(g, {32, 2, 5000, 8});
    CHECK(std::abs(st.mean - st.predicted_mean) < 3.0 * st.standard_error);
    CHECK(st.rms > 0.5 * st.predicted_rms_scale);
    CHECK(st.rms < 2.0 * st.predicted_rms_scale);
}

TEST_CASE("single-level projector is atypical for pure states") {
    const std::size_t n0 = 64;
    const auto pure = observable_statistics(ObservableSpec::projector(n0), {n0, 1, 5000, 2});
    CHECK(std::abs(pure.mean - 1.0 / n0) < 3.0 * pure.standard_error);
    // Fluctuations as large as the mean itself.
    CHECK(pure.rms / pure.mean == Approx(1.0).margin(0.2));

    // A mixture of n0 states approaches the maximally mixed value.
    const auto mixed = observable_statistics(ObservableSpec::projector(n0), {n0, n0, 2000, 2});
    CHECK(std::abs(mixed.mean - 1.0 / n0) < 3.0 * mixed.standard_error);
    CHECK(mixed.rms < 0.2 * mixed.mean);
}

TEST_CASE("few samples raise a warning") {
    const auto st = observable_statistics(ObservableSpec::identity(4), {4, 1, 10, 1});
    CHECK_FALSE(st.warnings.empty());
    CHECK_THROWS_AS(observable_statistics(ObservableSpec::identity(4), {5, 1, 10, 1}), InvalidInput);
}

TEST_CASE("mixtures match pure states on the extended space") {
    const std::size_t n0 = 16, n_m = 4;
    ObservableSpec g;
    for (std::size_t i = 0; i < n0; ++i) g.eigenvalues.push_back(static_cast<double>(i % 5));
    const auto mixed = observable_statistics(g, {n0, n_m, 8000, 21});
    const auto lifted = observable_statistics(lift_observable(g, n_m), {n0 * n_m, 1, 8000, 22});
    const double se = std::hypot(mixed.standard_error, lifted.standard_error);
    CHECK(std::abs(mixed.mean - lifted.mean) < 3.0 * se);
    CHECK(mixed.rms == Approx(lifted.rms).epsilon(0.1));
}

TEST_CASE("reduced density matrix examples") {
    Eigen::VectorXcd s(2), e(3);
    s << std::complex<double>(0.6, 0.0), std::complex<double>(0.0, 0.8);
    e << 1.0, 2.0, std::complex<double>(0.0, 2.0);
    e /= e.norm();
    const auto rho = reduced_density_matrix(product(s, e), {2, 3});
    CHECK((rho - s * s.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    // Maximally entangled: sum_k |k>|k> / sqrt(n).
    const std::size_t n = 5;
    Coefficients bell = Coefficients::Zero(n * n, 1);
    for (std::size_t k = 0; k < n; ++k) bell(k + n * k, 0) = 1.0 / std::sqrt(static_cast<double>(n));
    const auto mixed = reduced_density_matrix(bell, {n, n});
    CHECK((mixed - Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n)).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(reduced_density_matrix(bell, {2, 3}), InvalidInput);
}

TEST_CASE("reduced density matrices are valid and match the definition") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t ns = dim(rng), ne = dim(rng), nm = dim(rng);
        const auto c = sample_random_state(ns * ne, nm, rng);
        const auto rho = reduced_density_matrix(c, {ns, ne});
        const auto check = check_density_matrix(rho);
        CHECK(check.ok());
        CHECK((rho - naive_partial_trace(c, ns, ne)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("random bipartite states are close to maximally mixed") {
    std::mt19937_64 rng(5);
    const auto rho = reduced_density_matrix(sample_random_state(2 * 512, 1, rng), {2, 512});
    const double dev = (rho - Eigen::MatrixXcd::Identity(2, 2) / 2.0).norm();
    CHECK(dev < 10.0 / (2.0 * std::sqrt(512.0)));
}

TEST_CASE("factorisation deviation") {
    // Product across A, B and E.
    Eigen::VectorXcd a(2), b(3), e(4);
    a << 1.0, std::complex<double>(0.0, 1.0);
    b << 1.0, 2.0, 3.0;
    e << 1.0, -1.0, 0.5, std::complex<double>(0.2, 0.3);
    a /= a.norm();
    b /= b.norm();
    e /= e.norm();
    Eigen::VectorXcd ab(6);
    for (int bi = 0; bi < 3; ++bi)
        for (int ai = 0; ai < 2; ++ai) ab(ai + 2 * bi) = a(ai) * b(bi);
    CHECK(factorization_deviation(product(ab, e), 2, 3, 4) < 1e-12);

    const DensityMatrix quarter = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    CHECK(factorization_deviation(quarter, 2, 2) == 0.0);

    CHECK_THROWS_AS(factorization_deviation(quarter, 2, 3), InvalidInput);
}

TEST_CASE("factorisation improves with the environment size") {
    std::mt19937_64 rng(31);
    auto median_dev = [&](std::size_t ne) {
        std::vector<double> d;
        for (int i = 0; i < 201; ++i) d.push_back(factorization_deviation(sample_random_state(4 * ne, 1, rng), 2, 2, ne));
        std::nth_element(d.begin(), d.begin() + 100, d.end());
        return d[100];
    };
    const double d16 = median_dev(16), d128 = median_dev(128), d1024 = median_dev(1024);
    CHECK(d128 < d16);
    CHECK(d1024 < d128);
    CHECK(d1024 < 0.25 * d16);
}

TEST_CASE("convergence table scales as n_E^-1/2") {
    const auto t = typicality_convergence(2, {16, 64, 256}, 1, 2000, 3);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.slope == Approx(-0.5).margin(0.1));
    for (const auto& row : t.rows) {
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(row.mean(k, k).real() - 0.5) < 3.0 * row.stderr_re(k, k));
        }
        CHECK(std::abs(row.mean(0, 1).real()) < 3.0 * row.stderr_re(0, 1));
        CHECK(std::abs(row.mean(0, 1).imag()) < 3.0 * row.stderr_im(0, 1));
    }
    CHECK(t.rows[1].rms / t.rows[0].rms == Approx(0.5).margin(0.1));
}

TEST_CASE("budget is enforced with a memory estimate") {
    try {
        typicality_convergence(2, {16384}, 1, 10, 1);
        FAIL("expected a budget error");
    } catch (const BudgetExceeded& e) {
        CHECK(e.required_bytes() == coefficient_bytes(32768, 1));
    }
    CHECK(std::isnan(loglog_slope({1.0}, {1.0})));
    CHECK(loglog_slope({1.0, 4.0, 16.0}, {1.0, 0.5, 0.25}) == Approx(-0.5));
}
