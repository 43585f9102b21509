#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cptkin/exchange_kinetics.hpp"
#include "cptkin/radiation_kinetics.hpp"
#include "cptkin/stochastic_chain.hpp"
#include "support/generators.hpp"

using namespace cptkin;
using Catch::Approx;
using cplx = std::complex<double>;

namespace {

ChainState counts(std::int64_t a_s, std::int64_t a_c, std::int64_t b_s, std::int64_t b_c, double n,
                  std::vector<std::int64_t> q = {}) {
    ChainState s;
    s.counts = {a_s, a_c, b_s, b_c, std::move(q)};
    s.n_secondary = n;
    return s;
}

ChainConfig exchange_config(Extension ext, double k, double tau) {
    ChainConfig c;
    c.scenario = ChainScenario::Exchange;
    c.mode = {ext};
    c.k = k;
    c.tau = tau;
    return c;
}

ChainConfig radiation_config(Species sp, double k, double tau, bool reservoir = false,
                             RadiationVariant v = RadiationVariant::Neutral) {
    ChainConfig c;
    c.scenario = ChainScenario::Radiation;
    c.mode.radiation_variant = v;
    c.species = sp;
    c.reservoir = reservoir;
    c.k = k;
    c.tau = tau;
    return c;
}

}  // namespace

TEST_CASE("weight matrix examples") {
    const auto zero = build_weight_matrix({{0.0, 0.0}, {0.0, 0.0}});
    CHECK(zero(0, 0) == 1.0);
    CHECK(zero(1, 1) == 1.0);
    CHECK(zero(0, 1) == 0.0);
    CHECK(zero.transition_weight(0) == 0.0);

    const auto w = build_weight_matrix({{0.0, cplx(0.01, 0.0)}, {cplx(0.01, 0.0), 0.0}});
    CHECK(w(0, 1) == Approx(1e-4).epsilon(1e-12));
    CHECK(w(1, 0) == w(0, 1));
    CHECK(w.warnings.empty());

    const auto masked = build_weight_matrix({{0.0, cplx(0.01, 0.02)}, {cplx(0.01, -0.02), 0.0}},
                                            {{false, true}, {false, false}});
    CHECK(masked(0, 1) == 0.0);
    CHECK(masked(1, 0) == 0.0);
    CHECK(masked.is_forbidden(1, 0));

    const auto diag = build_weight_matrix({{0.03}});
    CHECK(diag(0, 0) == Approx(1.0 + 0.03 * 0.03));
}

TEST_CASE("weight matrix rejects non-Hermitian input and warns outside the perturbative regime") {
    CHECK_THROWS_AS(build_weight_matrix({{0.0, cplx(0.01, 0.01)}, {cplx(0.01, 0.01), 0.0}}), InvalidInput);
    CHECK_THROWS_AS(build_weight_matrix({{0.0, 0.01}, {0.02, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(build_weight_matrix({{cplx(0.0, 0.1)}}), InvalidInput);
    CHECK_THROWS_AS(build_weight_matrix({{0.0, 0.0}}), InvalidInput);
    const auto big = build_weight_matrix({{0.0, 0.5}, {0.5, 0.0}});
    CHECK_FALSE(big.warnings.empty());
}

TEST_CASE("weight matrices of random Hermitian perturbations are exactly symmetric") {
    testing::Gen g(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = g.integer(1, 6);
        std::vector<std::vector<cplx>> h(n, std::vector<cplx>(n));
        std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, false));
        for (int i = 0; i < n; ++i) {
            h[i][i] = g.uniform(-0.01, 0.01);
            for (int f = i + 1; f < n; ++f) {
                h[i][f] = cplx(g.uniform(-0.01, 0.01), g.uniform(-0.01, 0.01));
                h[f][i] = std::conj(h[i][f]);
                mask[i][f] = g.uniform(0, 1) < 0.3;
            }
        }
        const auto w = build_weight_matrix(h, mask);
        for (int i = 0; i < n; ++i)
            for (int f = 0; f < n; ++f) {
                CHECK(w(i, f) == w(f, i));
                CHECK(w(i, f) >= 0.0);
                if (i != f && (mask[i][f] || mask[f][i])) CHECK(w(i, f) == 0.0);
                if (i != f && !(mask[i][f] || mask[f][i])) CHECK(w(i, f) == Approx(std::norm(h[i][f])));
            }
    }
}

TEST_CASE("a step with zero expected counts leaves the state unchanged") {
    // No excited atoms and no excited antiatoms: both exchange channels vanish.
    const auto init = counts(0, 500, 0, 700, 1e4);
    const auto run = run_chain(init, 1000, exchange_config(Extension::Symmetric, 5.0, 0.1), 1);
    CHECK(run.final_state.counts == init.counts);
    CHECK(run.total_rejected() == 0);

    // Radiation with no photons and no excited atoms.
    const auto dark = counts(0, 300, 0, 0, 1e4, {0, 0});
    const auto r2 = run_chain(dark, 1000, radiation_config(Species::Matter, 5.0, 0.1), 2);
    CHECK(r2.final_state.counts == dark.counts);
}

TEST_CASE("counts stay non-negative and conservation holds exactly") {
    testing::Gen g(41);
    for (int trial = 0; trial < 60; ++trial) {
        const double n = 1e3;
        auto init = counts(g.integer(0, 60), g.integer(0, 60), g.integer(0, 60), g.integer(0, 60), n);
        const auto ext = g.coin() ? Extension::Symmetric : Extension::Antisymmetric;
        // Large k tau forces many rejections.
        const auto cfg = exchange_config(ext, g.uniform(1.0, 400.0), 0.5);
        const auto run = run_chain(init, 300, cfg, g.integer(0, 1 << 30), {1, false});
        const auto& c0 = init.counts;
        for (const auto& rec : run.records) {
            const auto& c = rec.counts;
            REQUIRE(c.non_negative());
            CHECK(c.a_star + c.a_circ == c0.a_star + c0.a_circ);
            CHECK(c.abar_star + c.abar_circ == c0.abar_star + c0.abar_circ);
            CHECK(c.a_star + c.abar_star == c0.a_star + c0.abar_star);
        }
    }
    for (int trial = 0; trial < 60; ++trial) {
        const auto sp = g.coin() ? Species::Matter : Species::Antimatter;
        auto init = counts(g.integer(0, 40), g.integer(0, 40), g.integer(0, 40), g.integer(0, 40), 200.0,
                           {g.integer(0, 10), g.integer(0, 10), g.integer(0, 10)});
        const auto run = run_chain(init, 300, radiation_config(sp, g.uniform(1.0, 50.0), 0.2), trial);
        const auto& c0 = init.counts;
        const auto star0 = sp == Species::Matter ? c0.a_star : c0.abar_star;
        const auto circ0 = sp == Species::Matter ? c0.a_circ : c0.abar_circ;
        for (const auto& rec : run.records) {
            const auto& c = rec.counts;
            REQUIRE(c.non_negative());
            const auto star = sp == Species::Matter ? c.a_star : c.abar_star;
            const auto circ = sp == Species::Matter ? c.a_circ : c.abar_circ;
            CHECK(star + c.photon_total() == star0 + c0.photon_total());
            CHECK(star + circ == star0 + circ0);
        }
    }
}

TEST_CASE("rejections are logged when draws exceed the available counts") {
    const auto init = counts(2, 0, 0, 5000, 10.0);
    const auto run = run_chain(init, 5, exchange_config(Extension::Symmetric, 1.0, 1.0), 9);
    CHECK(run.total_rejected() > 0);
    REQUIRE_FALSE(run.rejections.empty());
    CHECK(run.rejections.front().reaction == 1);
    CHECK(run.final_state.counts.a_star + run.final_state.counts.a_circ == 2);
}

TEST_CASE("identical seeds give identical runs") {
    const auto init = counts(300, 100, 50, 400, 1e4, {});
    const auto cfg = exchange_config(Extension::Symmetric, 10.0, 0.05);
    const auto a = run_chain(init, 2000, cfg, 123);
    const auto b = run_chain(init, 2000, cfg, 123);
    const auto c = run_chain(init, 2000, cfg, 124);
    REQUIRE(a.records.size() == b.records.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].counts == b.records[i].counts);
        CHECK(a.trajectory.samples[i].s_symmetric == b.trajectory.samples[i].s_symmetric);
        if (i < c.records.size() && !(a.records[i].counts == c.records[i].counts)) differs = true;
    }
    CHECK(differs);
    CHECK(a.rng_algorithm == "mt19937_64");
    CHECK(chain_seed(5, 0) == chain_seed(5, 0));
    CHECK(chain_seed(5, 0) != chain_seed(5, 1));
}

TEST_CASE("mean increments per unit time match the exchange rate law") {
    // Repeated single steps from one state; the mean increment of F(A°)
    // divided by N tau estimates d f(A°)/dt.
    for (auto ext : {Extension::Symmetric, Extension::Antisymmetric}) {
        const auto init = counts(200'000, 60'000, 90'000, 150'000, 1e6);
        const auto cfg = exchange_config(ext, 2.0, 0.01);
        std::mt19937_64 rng(77);
        const int n_steps = 10'000;
        RunningStats inc;
        double mean1 = 0.0, mean2 = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            ChainState s = init;
            const auto log = sample_chain_step(s, cfg, rng);
            mean1 = log.reactions[0].mean;
            mean2 = log.reactions[1].mean;
            inc.add(static_cast<double>(s.counts.a_circ - init.counts.a_circ));
        }
        const double expected = exchange_rhs(init.populations(), cfg.k, {ext}).d_f_a_circ * init.n_secondary * cfg.tau;
        const double sigma = std::sqrt((mean1 + mean2) / n_steps);
        CHECK(std::abs(inc.mean - expected) < 3.0 * sigma);
        CHECK(inc.variance() == Approx(mean1 + mean2).epsilon(0.05));
    }
}

TEST_CASE("symmetric exchange reaches the closed-form equilibrium within binomial error") {
    auto init = counts(900'000, 100'000, 200'000, 800'000, 1e7);
    const auto run = run_chain(init, 100'000, exchange_config(Extension::Symmetric, 1.0, 0.05), 2024,
                               {1000, true});
    const auto eq = exchange_equilibrium(conserved_quantities(init.populations()), {Extension::Symmetric});
    const auto& c = run.final_state.counts;
    const double f_a = init.populations().f_a();
    const double p = eq.state.f_a_star / f_a;
    const double n_a = static_cast<double>(c.a_star + c.a_circ);
    const double sigma = std::sqrt(n_a * p * (1.0 - p));
    CHECK(std::abs(static_cast<double>(c.a_star) - n_a * p) < 3.0 * sigma);
}

TEST_CASE("frozen matter reservoir gives a Bose-Einstein mean occupation") {
    // f* / f° = exp(-ln 2) so q_e = 1.
    const auto init = counts(50, 100, 0, 0, 1000.0, {0});
    const auto cfg = radiation_config(Species::Matter, 20.0, 0.01, true);
    const std::size_t n_chains = 400;
    const auto ens = run_ensemble(init, cfg, n_chains, 8, {4000});
    const auto& q = ens.checkpoints[0].stats[4];
    const double qe = 1.0 / std::expm1(std::log(2.0));
    CHECK(std::abs(q.mean - qe) < 3.0 * q.standard_error());
    // Geometric law: variance q_e (1 + q_e).
    CHECK(q.variance() == Approx(qe * (1.0 + qe)).epsilon(0.25));
}

TEST_CASE("antimatter with positive intrinsic temperature exhausts its excited level") {
    // Few excited antiatoms among many ground ones (intrinsic T > 0).
    int exhausted = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto init = counts(0, 0, 5, 50, 1000.0, {0});
        const auto run = run_chain(init, 200'000, radiation_config(Species::Antimatter, 50.0, 0.01), seed);
        if (run.final_state.counts.abar_star == 0) {
            ++exhausted;
            CHECK(run.trajectory.termination == Termination::ExcitedPopulationExhausted);
        }
    }
    CHECK(exhausted >= 99);
}

TEST_CASE("antisymmetric exchange stops at a zero count") {
    const auto init = counts(10, 0, 10, 10, 1e3);
    const auto run = run_chain(init, 100, exchange_config(Extension::Antisymmetric, 1.0, 0.1), 1);
    CHECK(run.trajectory.termination == Termination::Boundary);
    CHECK(run.trajectory.boundary_component == "f_a_circ");
    CHECK(run.records.size() == 1);
}

TEST_CASE("chain input validation") {
    const auto s = counts(1, 1, 1, 1, 100.0);
    CHECK_THROWS_AS(run_chain(s, 0, exchange_config(Extension::Symmetric, 1.0, 0.1), 1), InvalidInput);
    CHECK_THROWS_AS(run_chain(s, 10, exchange_config(Extension::Symmetric, 1.0, 0.0), 1), InvalidInput);
    CHECK_THROWS_AS(run_chain(counts(-1, 1, 1, 1, 100.0), 10, exchange_config(Extension::Symmetric, 1.0, 0.1), 1),
                    InvalidInput);
    CHECK_THROWS_AS(run_chain(s, 10, radiation_config(Species::Matter, 1.0, 0.1), 1), InvalidInput);
    const auto with_q = counts(1, 1, 1, 1, 100.0, {1});
    CHECK_THROWS_AS(
        run_chain(with_q, 10, radiation_config(Species::Antimatter, 1.0, 0.1, false, RadiationVariant::Decohering), 1),
        NotApplicable);
}

TEST_CASE("ensemble means follow the ODE for a small ensemble") {
    PopulationState p;
    p.f_a_star = 0.03;
    p.f_a_circ = 0.01;
    p.f_abar_star = 0.01;
    p.f_abar_circ = 0.05;
    p.n_secondary = 1e6;
    const auto cfg = exchange_config(Extension::Symmetric, 10.0, 2e-3);
    const auto ens = run_ensemble(chain_state_from(p), cfg, 60, 5, {1000, 5000});
    ExchangeIntegration opt;
    opt.stop_at_equilibrium = false;
    for (const auto& cp : ens.checkpoints) {
        const auto f = integrate_exchange(p, cfg.k, cp.t, {Extension::Symmetric}, opt).back().populations.fractions();
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::abs(cp.stats[j].mean - f[j]) < 4.0 * cp.stats[j].standard_error());
    }
}

TEST_CASE("running statistics merge in any order") {
    testing::Gen g(1);
    std::vector<double> xs;
    for (int i = 0; i < 300; ++i) xs.push_back(g.uniform(-5, 5));
    RunningStats all, a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 120 ? a : b).add(xs[i]);
    }
    RunningStats ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab.mean == Approx(all.mean).epsilon(1e-12));
    CHECK(ba.variance() == Approx(all.variance()).epsilon(1e-12));
    CHECK(ab.n == 300);
}
