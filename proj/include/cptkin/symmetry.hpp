#pragma once

// Rate equations as data, so CP and CPT can be applied mechanically and
// compared both structurally and numerically.
//
// An equation is a target (a rate dX/dt or a step count dq1/dq2) equal to a
// sum of signed terms; each term is a product of factors (a population or
// photon number at some epoch, optionally shifted by a constant) times a
// product of Heaviside guards. The rate constant is implicit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cptkin/core_state.hpp"

namespace cptkin::symmetry {

enum class Symbol { AStar, ACirc, AbarStar, AbarCirc, Photons };
/// Current for ODEs; Before/After are the primed/double-primed values of the
/// step equations.
enum class Epoch { Current, Before, After };

struct Factor {
    Symbol symbol;
    Epoch epoch = Epoch::Current;
    double offset = 0.0;
    auto operator<=>(const Factor&) const = default;
};

struct Guard {
    Symbol symbol;
    Epoch epoch = Epoch::Current;
    auto operator<=>(const Guard&) const = default;
};

struct Term {
    double coefficient = 1.0;
    std::vector<Factor> factors;
    std::vector<Guard> guards;
};

enum class TargetKind { Rate, StepCount };

struct Target {
    TargetKind kind = TargetKind::Rate;
    Symbol symbol = Symbol::Photons;  // rates
    int index = 0;                    // step counts: 1 (absorption/forward), 2
    auto operator<=>(const Target&) const = default;
};

struct Equation {
    Target target;
    std::vector<Term> terms;
};

struct Descriptor {
    std::string name;
    bool step_form = false;
    std::vector<Equation> equations;
};

enum class Family {
    ExchangeSym,
    ExchangeAnti,
    RadiationStepsMatter,
    RadiationStepsAntimatter,
    RadiationOdeMatter,
    RadiationOdeAntimatter,
};

inline constexpr std::array<Family, 6> kAllFamilies = {
    Family::ExchangeSym,          Family::ExchangeAnti,       Family::RadiationStepsMatter,
    Family::RadiationStepsAntimatter, Family::RadiationOdeMatter, Family::RadiationOdeAntimatter};

enum class Transform { CP, CPT };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::ExchangeSym: return "ExchangeSym";
        case Family::ExchangeAnti: return "ExchangeAnti";
        case Family::RadiationStepsMatter: return "RadiationSteps(Matter)";
        case Family::RadiationStepsAntimatter: return "RadiationSteps(Antimatter)";
        case Family::RadiationOdeMatter: return "RadiationODE(Matter)";
        case Family::RadiationOdeAntimatter: return "RadiationODE(Antimatter)";
    }
    return "?";
}

inline std::string_view to_string(Transform t) { return t == Transform::CP ? "CP" : "CPT"; }

inline Family family_from_string(std::string_view s) {
    for (Family f : kAllFamilies)
        if (to_string(f) == s) return f;
    throw InvalidInput("unknown rate-equation family '" + std::string(s) + "'");
}

inline Transform transform_from_string(std::string_view s) {
    if (s == "CP") return Transform::CP;
    if (s == "CPT") return Transform::CPT;
    throw InvalidInput("unknown symmetry transform '" + std::string(s) + "'");
}

namespace detail {

inline Factor f(Symbol s, Epoch e = Epoch::Current, double offset = 0.0) { return {s, e, offset}; }
inline Guard h(Symbol s, Epoch e = Epoch::Current) { return {s, e}; }
inline Target rate(Symbol s) { return {TargetKind::Rate, s, 0}; }
inline Target step(int i) { return {TargetKind::StepCount, Symbol::Photons, i}; }

inline Equation scaled(Target t, const std::vector<Term>& terms, double sign) {
    Equation e{t, terms};
    for (auto& term : e.terms) term.coefficient *= sign;
    return e;
}

inline Descriptor exchange(bool symmetric) {
    using S = Symbol;
    std::vector<Term> flux;
    if (symmetric) {
        flux = {{+1.0, {f(S::AStar), f(S::AbarCirc)}, {h(S::ACirc), h(S::AbarStar)}},
                {-1.0, {f(S::ACirc), f(S::AbarStar)}, {h(S::AStar), h(S::AbarCirc)}}};
    } else {
        flux = {{+1.0, {f(S::AStar), f(S::AbarStar)}, {h(S::ACirc), h(S::AbarCirc)}},
                {-1.0, {f(S::ACirc), f(S::AbarCirc)}, {h(S::AStar), h(S::AbarStar)}}};
    }
    Descriptor d;
    d.name = symmetric ? "ExchangeSym" : "ExchangeAnti";
    d.equations = {scaled(rate(S::ACirc), flux, +1.0), scaled(rate(S::AStar), flux, -1.0),
                   scaled(rate(S::AbarStar), flux, +1.0), scaled(rate(S::AbarCirc), flux, -1.0)};
    return d;
}

}  // namespace detail

inline Descriptor descriptor(Family fam) {
    using S = Symbol;
    using E = Epoch;
    using detail::f;
    using detail::h;
    Descriptor d;
    d.name = std::string(to_string(fam));
    switch (fam) {
        case Family::ExchangeSym: return detail::exchange(true);
        case Family::ExchangeAnti: return detail::exchange(false);
        case Family::RadiationStepsMatter:
            d.step_form = true;
            d.equations = {
                {detail::step(1), {{1.0, {f(S::ACirc, E::Before), f(S::Photons, E::Before)}, {h(S::AStar, E::After)}}}},
                {detail::step(2), {{1.0, {f(S::AStar, E::Before), f(S::Photons, E::After)}, {h(S::ACirc, E::After)}}}},
            };
            return d;
        case Family::RadiationStepsAntimatter:
            d.step_form = true;
            d.equations = {
                {detail::step(1), {{1.0, {f(S::AbarStar, E::After), f(S::Photons, E::Before)}, {h(S::AbarCirc, E::Before)}}}},
                {detail::step(2), {{1.0, {f(S::AbarCirc, E::After), f(S::Photons, E::After)}, {h(S::AbarStar, E::Before)}}}},
            };
            return d;
        case Family::RadiationOdeMatter:
            d.equations = {{detail::rate(S::Photons),
                            {{+1.0, {f(S::Photons, E::Current, 1.0), f(S::AStar)}, {}},
                             {-1.0, {f(S::Photons), f(S::ACirc)}, {}}}}};
            return d;
        case Family::RadiationOdeAntimatter:
            d.equations = {{detail::rate(S::Photons),
                            {{+1.0, {f(S::Photons, E::Current, 1.0), f(S::AbarCirc)}, {h(S::AbarStar)}},
                             {-1.0, {f(S::Photons), f(S::AbarStar)}, {h(S::AbarCirc)}}}}};
            return d;
    }
    throw InvalidInput("unknown rate-equation family");
}

namespace detail {

inline Symbol swap_species(Symbol s) {
    switch (s) {
        case Symbol::AStar: return Symbol::AbarStar;
        case Symbol::ACirc: return Symbol::AbarCirc;
        case Symbol::AbarStar: return Symbol::AStar;
        case Symbol::AbarCirc: return Symbol::ACirc;
        case Symbol::Photons: return Symbol::Photons;
    }
    return s;
}

inline Epoch swap_epoch(Epoch e) {
    if (e == Epoch::Before) return Epoch::After;
    if (e == Epoch::After) return Epoch::Before;
    return e;
}

}  // namespace detail

/// CP exchanges matter and antimatter. CPT additionally reverses time: an
/// ODE changes the sign of its right-hand side; a step equation swaps the
/// before/after epochs and the roles of the forward and reverse reactions.
inline Descriptor apply_symmetry_transform(const Descriptor& in, Transform t) {
    Descriptor out = in;
    out.name = std::string(to_string(t)) + "(" + in.name + ")";
    for (auto& eq : out.equations) {
        eq.target.symbol = detail::swap_species(eq.target.symbol);
        for (auto& term : eq.terms) {
            for (auto& fac : term.factors) fac.symbol = detail::swap_species(fac.symbol);
            for (auto& g : term.guards) g.symbol = detail::swap_species(g.symbol);
        }
        if (t != Transform::CPT) continue;
        if (in.step_form) {
            if (eq.target.kind == TargetKind::StepCount) eq.target.index = 3 - eq.target.index;
            for (auto& term : eq.terms) {
                for (auto& fac : term.factors) fac.epoch = detail::swap_epoch(fac.epoch);
                for (auto& g : term.guards) g.epoch = detail::swap_epoch(g.epoch);
            }
        } else {
            for (auto& term : eq.terms) term.coefficient = -term.coefficient;
        }
    }
    return out;
}

/// The family a transform is expected to map `fam` onto: itself for the
/// exchange kinetics, the other species for radiation.
inline Family mirror_family(Family fam) {
    switch (fam) {
        case Family::RadiationStepsMatter: return Family::RadiationStepsAntimatter;
        case Family::RadiationStepsAntimatter: return Family::RadiationStepsMatter;
        case Family::RadiationOdeMatter: return Family::RadiationOdeAntimatter;
        case Family::RadiationOdeAntimatter: return Family::RadiationOdeMatter;
        default: return fam;
    }
}

/// Sorted factors/guards/terms/equations with like terms merged.
inline Descriptor canonical(const Descriptor& in) {
    Descriptor out = in;
    auto key = [](const Term& t) { return std::tie(t.factors, t.guards); };
    for (auto& eq : out.equations) {
        for (auto& term : eq.terms) {
            std::sort(term.factors.begin(), term.factors.end());
            std::sort(term.guards.begin(), term.guards.end());
        }
        std::sort(eq.terms.begin(), eq.terms.end(), [&](const Term& a, const Term& b) { return key(a) < key(b); });
        std::vector<Term> merged;
        for (const auto& term : eq.terms) {
            if (!merged.empty() && key(merged.back()) == key(term)) merged.back().coefficient += term.coefficient;
            else merged.push_back(term);
        }
        std::erase_if(merged, [](const Term& t) { return t.coefficient == 0.0; });
        eq.terms = std::move(merged);
    }
    std::sort(out.equations.begin(), out.equations.end(),
              [](const Equation& a, const Equation& b) { return a.target < b.target; });
    return out;
}

inline bool structurally_equal(const Descriptor& a, const Descriptor& b) {
    const auto ca = canonical(a);
    const auto cb = canonical(b);
    if (ca.step_form != cb.step_form || ca.equations.size() != cb.equations.size()) return false;
    for (std::size_t i = 0; i < ca.equations.size(); ++i) {
        const auto& ea = ca.equations[i];
        const auto& eb = cb.equations[i];
        if (ea.target != eb.target || ea.terms.size() != eb.terms.size()) return false;
        for (std::size_t j = 0; j < ea.terms.size(); ++j) {
            const auto& ta = ea.terms[j];
            const auto& tb = eb.terms[j];
            if (ta.coefficient != tb.coefficient || ta.factors != tb.factors || ta.guards != tb.guards)
                return false;
        }
    }
    return true;
}

/// Values of every symbol at every epoch.
struct Probe {
    std::array<std::array<double, 3>, 5> values{};

    double get(Symbol s, Epoch e) const {
        return values[static_cast<std::size_t>(s)][static_cast<std::size_t>(e)];
    }
    void set(Symbol s, Epoch e, double v) {
        values[static_cast<std::size_t>(s)][static_cast<std::size_t>(e)] = v;
    }
};

inline double evaluate(const Equation& eq, const Probe& p) {
    double total = 0.0;
    for (const auto& term : eq.terms) {
        double v = term.coefficient;
        for (const auto& fac : term.factors) v *= p.get(fac.symbol, fac.epoch) + fac.offset;
        for (const auto& g : term.guards) v *= heaviside(p.get(g.symbol, g.epoch));
        total += v;
    }
    return total;
}

inline std::string describe(Symbol s) {
    switch (s) {
        case Symbol::AStar: return "f(A*)";
        case Symbol::ACirc: return "f(A°)";
        case Symbol::AbarStar: return "f(Abar*)";
        case Symbol::AbarCirc: return "f(Abar°)";
        case Symbol::Photons: return "q";
    }
    return "?";
}

inline std::string describe(const Descriptor& d) {
    auto epoch = [](Epoch e) { return e == Epoch::Before ? "'" : e == Epoch::After ? "''" : ""; };
    std::ostringstream os;
    os << d.name << ":";
    for (const auto& eq : d.equations) {
        os << "\n  ";
        if (eq.target.kind == TargetKind::StepCount) os << "dq" << eq.target.index;
        else os << "d" << describe(eq.target.symbol) << "/dt";
        os << " =";
        for (const auto& term : eq.terms) {
            os << (term.coefficient < 0 ? " - " : " + ");
            if (std::abs(term.coefficient) != 1.0) os << std::abs(term.coefficient) << " ";
            os << "k";
            for (const auto& fac : term.factors) {
                os << " ";
                if (fac.offset != 0.0) os << "(" << describe(fac.symbol) << epoch(fac.epoch) << "+" << fac.offset << ")";
                else os << describe(fac.symbol) << epoch(fac.epoch);
            }
            for (const auto& g : term.guards) os << " H(" << describe(g.symbol) << epoch(g.epoch) << ")";
        }
    }
    return os.str();
}

struct InvarianceVerdict {
    Family family = Family::ExchangeSym;
    Transform transform = Transform::CP;
    Family mirror = Family::ExchangeSym;
    bool invariant = false;
    bool structurally_equal = false;
    double max_deviation = 0.0;
    std::size_t probes = 0;
    std::optional<Probe> witness;
};

/// Probe with every population in (0.01, 0.3) and photon numbers in (0, 10),
/// drawn independently for every epoch.
inline Probe random_probe(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> frac(0.01, 0.3);
    std::uniform_real_distribution<double> photons(0.0, 10.0);
    Probe p;
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t e = 0; e < 3; ++e)
            p.values[s][e] = s == static_cast<std::size_t>(Symbol::Photons) ? photons(rng) : frac(rng);
    return p;
}

/// Compares transform(family) against its mirror family on random probes.
/// The verdict is "invariant" iff the largest deviation is within tolerance.
inline InvarianceVerdict check_invariance(Family fam, Transform t, std::size_t n_random_states,
                                          double tolerance, std::uint64_t seed = 20240601) {
    if (n_random_states < 1) throw InvalidInput("check_invariance: need at least one random state");
    InvarianceVerdict v;
    v.family = fam;
    v.transform = t;
    v.mirror = mirror_family(fam);
    const auto image = canonical(apply_symmetry_transform(descriptor(fam), t));
    const auto expected = canonical(descriptor(v.mirror));
    v.structurally_equal = structurally_equal(image, expected);

    std::mt19937_64 rng(seed);
    const bool same_targets = [&] {
        if (image.equations.size() != expected.equations.size()) return false;
        for (std::size_t i = 0; i < image.equations.size(); ++i)
            if (image.equations[i].target != expected.equations[i].target) return false;
        return true;
    }();
    for (std::size_t n = 0; n < n_random_states; ++n) {
        const Probe p = random_probe(rng);
        double dev = 0.0;
        if (!same_targets) {
            dev = std::numeric_limits<double>::infinity();
        } else {
            for (std::size_t i = 0; i < image.equations.size(); ++i)
                dev = std::max(dev, std::abs(evaluate(image.equations[i], p) - evaluate(expected.equations[i], p)));
        }
        ++v.probes;
        if (dev > v.max_deviation) {
            v.max_deviation = dev;
            v.witness = p;
        }
    }
    v.invariant = v.max_deviation <= tolerance;
    if (v.invariant) v.witness.reset();
    return v;
}

}  // namespace cptkin::symmetry
