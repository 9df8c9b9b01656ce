#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noonsim/fock.hpp"
#include "noonsim/optics.hpp"

namespace noonsim {

enum class DetectorModel { pnr, threshold };

/**
 * Required detector readings. Under `pnr` each listed mode must hold exactly
 * the given count; under `threshold` a count of 0 means "dark" and any
 * positive count means "clicked" (at least one photon).
 *
 * An untagged mode label sums over all its tagged copies.
 */
struct DetectionPattern {
    std::vector<std::pair<ModeLabel, unsigned>> counts;
    DetectorModel model = DetectorModel::pnr;

    static DetectionPattern make(DetectorModel model,
                                 const std::vector<std::pair<std::string, unsigned>> &named) {
        DetectionPattern p;
        p.model = model;
        for (const auto &[name, n] : named) {
            p.counts.emplace_back(ModeLabel::parse(name), n);
        }
        p.validate();
        return p;
    }

    static DetectionPattern pnr(const std::vector<std::pair<std::string, unsigned>> &named) {
        return make(DetectorModel::pnr, named);
    }

    static DetectionPattern threshold(const std::vector<std::pair<std::string, unsigned>> &named) {
        return make(DetectorModel::threshold, named);
    }

    void validate() const {
        if (counts.empty()) {
            throw std::invalid_argument("detection pattern constrains no mode");
        }
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (std::size_t j = i + 1; j < counts.size(); ++j) {
                if (counts[i].first.covers(counts[j].first) ||
                    counts[j].first.covers(counts[i].first)) {
                    throw std::invalid_argument("detection pattern lists mode '" +
                                                counts[i].first.name() + "' twice");
                }
            }
        }
    }
};

/// Probability of a detection event and the state it leaves behind on the
/// unmeasured modes. `conditional` is empty when the event cannot happen.
struct HeraldOutcome {
    double probability = 0.0;
    std::optional<Ensemble> conditional;

    bool fired() const { return conditional.has_value(); }

    /// The conditional state when it is pure; throws otherwise.
    const PureState &pure_conditional() const {
        if (!conditional) {
            throw ZeroStateError("herald never fires: no conditional state");
        }
        if (!conditional->is_pure()) {
            throw std::logic_error("conditional state is a mixture");
        }
        return conditional->components().front().state;
    }
};

namespace detail {

struct ResolvedPattern {
    std::vector<std::vector<std::size_t>> groups; // covered indices per entry
    std::vector<unsigned> required;
    std::vector<bool> measured;
};

inline ResolvedPattern resolve(const DetectionPattern &pat, const ModeRegistry &reg) {
    pat.validate();
    ResolvedPattern r;
    r.measured.assign(reg.size(), false);
    for (const auto &[label, n] : pat.counts) {
        auto cov = reg.covered_by(label);
        if (cov.empty()) {
            throw RegistryError("detection pattern mode '" + label.name() +
                                "' is not in the registry");
        }
        for (auto i : cov) {
            r.measured[i] = true;
        }
        r.groups.push_back(std::move(cov));
        r.required.push_back(n);
    }
    return r;
}

inline bool matches(const ResolvedPattern &r, DetectorModel model, const OccupationVector &occ) {
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
        unsigned n = 0;
        for (auto i : r.groups[g]) {
            n += occ[i];
        }
        const bool ok = model == DetectorModel::pnr ? n == r.required[g]
                                                    : (r.required[g] == 0 ? n == 0 : n >= 1);
        if (!ok) {
            return false;
        }
    }
    return true;
}

} // namespace detail

/**
 * Projective photon counting on the pattern's modes.
 *
 * The probability is the squared norm of the projection onto matching basis
 * kets. The conditional state lives on the unmeasured modes; projections
 * that differ in the exact (tag-resolved) occupation of the measured modes
 * are orthogonal and form separate mixture components.
 */
inline HeraldOutcome detect(const PureState &s, const DetectionPattern &pat) {
    const auto r = detail::resolve(pat, s.registry());
    std::vector<ModeLabel> rest;
    for (std::size_t i = 0; i < r.measured.size(); ++i) {
        if (!r.measured[i]) {
            rest.push_back(s.registry()[i]);
        }
    }
    const ModeRegistry rest_reg(rest);
    std::map<OccupationVector, PureState> branches;
    double probability = 0.0;
    for (const auto &[occ, amp] : s.terms()) {
        if (!detail::matches(r, pat.model, occ)) {
            continue;
        }
        OccupationVector key, remaining;
        for (std::size_t i = 0; i < occ.size(); ++i) {
            (r.measured[i] ? key : remaining).push_back(occ[i]);
        }
        auto it = branches.try_emplace(key, rest_reg).first;
        it->second.add(remaining, amp);
        probability += std::norm(amp);
    }
    HeraldOutcome out;
    out.probability = probability;
    if (probability <= kPruneTolerance) {
        return out;
    }
    std::vector<EnsembleComponent> comps;
    for (const auto &[key, branch] : branches) {
        const double w = branch.norm_squared();
        if (w > 0.0) {
            comps.push_back({w / probability, normalize(branch)});
        }
    }
    // Rounding can leave the weights a few ulps off 1.
    double total = 0.0;
    for (const auto &c : comps) {
        total += c.weight;
    }
    for (auto &c : comps) {
        c.weight /= total;
    }
    out.conditional = Ensemble(std::move(comps));
    return out;
}

/// Detection on a mixture: probabilities add with the mixture weights and
/// the conditional is the reweighted union of the per-branch conditionals.
inline HeraldOutcome detect_ensemble(const Ensemble &e, const DetectionPattern &pat) {
    HeraldOutcome out;
    std::vector<EnsembleComponent> comps;
    for (const auto &c : e.components()) {
        auto part = detect(c.state, pat);
        out.probability += c.weight * part.probability;
        if (!part.conditional) {
            continue;
        }
        for (const auto &sub : part.conditional->components()) {
            comps.push_back({c.weight * part.probability * sub.weight, sub.state});
        }
    }
    if (out.probability <= kPruneTolerance || comps.empty()) {
        return out;
    }
    double total = 0.0;
    for (const auto &c : comps) {
        total += c.weight;
    }
    for (auto &c : comps) {
        c.weight /= total;
    }
    out.conditional = Ensemble(std::move(comps));
    return out;
}

/// |<target|s>|^2 for unit-norm states.
inline double fidelity(const PureState &s, const PureState &target) {
    return std::norm(inner_product(target, s));
}

/// <target| rho |target> for the mixture rho.
inline double fidelity(const Ensemble &e, const PureState &target) {
    double f = 0.0;
    for (const auto &c : e.components()) {
        f += c.weight * fidelity(c.state, target);
    }
    return f;
}

/// Waveplate that turns detection of h/v into detection in `basis`:
/// none for hv, a half-wave plate at 22.5 deg for pm, a quarter-wave plate at
/// 45 deg for rl.
inline JonesMatrix analyzer(PolBasis basis) {
    switch (basis) {
    case PolBasis::hv: return JonesMatrix::Identity();
    case PolBasis::pm: return hwp(deg_to_rad(22.5));
    case PolBasis::rl: return qwp(deg_to_rad(45.0));
    }
    return JonesMatrix::Identity();
}

/// The NOON state (|n,0> + e^{i phase} |0,n>)/sqrt(2) of path `spatial` in
/// `basis`, written over that path's h and v modes.
inline PureState noon_state(unsigned n, double phase, PolBasis basis = PolBasis::hv,
                            const std::string &spatial = "b") {
    const auto [plus, minus] = basis_polarizations(basis);
    const ModeRegistry reg({{spatial, plus}, {spatial, minus}});
    PureState s(reg);
    const double r = 1.0 / std::sqrt(2.0);
    s.add({n, 0}, r);
    s.add({0, n}, std::polar(r, phase));
    return express_in_hv(s, spatial, basis);
}

/**
 * A heralding setup on path `input` of a source state. The input path is
 * renamed to `first_port`, vacuum paths are added for the unused input
 * ports, the circuit runs, and `pattern` is detected.
 */
struct HeraldScheme {
    std::string name;
    std::string input = "a";
    std::string first_port = "a";
    std::vector<std::string> vacuum_ports;
    Circuit circuit;
    DetectionPattern pattern;
};

/// The source state with the scheme's port renaming and vacuum ports added.
inline PureState prepare_input(const HeraldScheme &scheme, const PureState &s) {
    if (!s.registry().has_spatial(scheme.input)) {
        throw RegistryError("scheme '" + scheme.name + "' needs path '" + scheme.input + "'");
    }
    PureState out = scheme.first_port == scheme.input
                        ? s
                        : rename_spatial(s, scheme.input, scheme.first_port);
    std::vector<ModeLabel> extra;
    for (const auto &port : scheme.vacuum_ports) {
        for (const auto &l : s.registry().labels()) {
            if (l.spatial == scheme.input) {
                extra.emplace_back(port, l.pol, l.tag);
            }
        }
    }
    return extra.empty() ? out : extend_with_vacuum(out, std::move(extra));
}

inline HeraldOutcome run_scheme(const HeraldScheme &scheme, const PureState &s) {
    return detect(apply_circuit(scheme.circuit, prepare_input(scheme, s)), scheme.pattern);
}

inline HeraldOutcome run_scheme(const HeraldScheme &scheme, const Ensemble &e) {
    std::vector<EnsembleComponent> comps;
    for (const auto &c : e.components()) {
        comps.push_back({c.weight, apply_circuit(scheme.circuit, prepare_input(scheme, c.state))});
    }
    return detect_ensemble(Ensemble(std::move(comps)), scheme.pattern);
}

/// Two-photon coincidence on path a behind a pm or rl analyzer.
inline HeraldScheme noon2_scheme(PolBasis basis) {
    HeraldScheme s;
    s.name = std::string("noon2-") + std::string(to_string(basis));
    switch (basis) {
    case PolBasis::hv: break;
    case PolBasis::pm: s.circuit.add(ElementKind::hwp, deg_to_rad(22.5), {"a"}); break;
    case PolBasis::rl: s.circuit.add(ElementKind::qwp, deg_to_rad(45.0), {"a"}); break;
    }
    s.pattern = DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}});
    return s;
}

/// PBS split of path a into a and c, a half-wave plate at 45 deg on c, and a
/// balanced beam splitter recombining a and c; coincidence between the two
/// outputs.
inline HeraldScheme noon2_interferometer_scheme() {
    HeraldScheme s;
    s.name = "noon2-interferometer";
    s.vacuum_ports = {"c"};
    s.circuit.add(ElementKind::pbs, 0.0, {"a", "c"})
        .add(ElementKind::hwp, deg_to_rad(45.0), {"c"})
        .add(ElementKind::bs, 0.5, {"a", "c"});
    s.pattern = DetectionPattern::pnr({{"a_h", 1}, {"a_v", 0}, {"c_h", 1}, {"c_v", 0}});
    return s;
}

/// Balanced splitter from a into a1, a2; pm analyzer on a1, rl analyzer on a2;
/// fourfold coincidence.
inline HeraldScheme noon4_scheme() {
    HeraldScheme s;
    s.name = "noon4";
    s.first_port = "a1";
    s.vacuum_ports = {"a2"};
    s.circuit.add(ElementKind::bs, 0.5, {"a1", "a2"})
        .add(ElementKind::hwp, deg_to_rad(22.5), {"a1"})
        .add(ElementKind::qwp, deg_to_rad(45.0), {"a2"});
    s.pattern = DetectionPattern::pnr({{"a1_h", 1}, {"a1_v", 1}, {"a2_h", 1}, {"a2_v", 1}});
    return s;
}

/// Analyzer directions of the eight-photon scheme's leaves, in degrees. Each
/// is set by a half-wave plate at half the angle, so the four detected pairs
/// sit 45 deg apart on the equator of the sphere and the eightfold operator
/// bunches in rl.
inline constexpr double kNoon8AnalyzerDeg[4] = {0.0, 22.5, 45.0, 67.5};

/// Two levels of balanced splitters fan a out to a1..a4, a half-wave plate
/// sits on each leaf, then every leaf records an h/v coincidence.
inline HeraldScheme noon8_scheme() {
    HeraldScheme s;
    s.name = "noon8";
    s.first_port = "a1";
    s.vacuum_ports = {"a2", "a3", "a4"};
    s.circuit.add(ElementKind::bs, 0.5, {"a1", "a3"})
        .add(ElementKind::bs, 0.5, {"a1", "a2"})
        .add(ElementKind::bs, 0.5, {"a3", "a4"});
    const char *leaves[4] = {"a1", "a2", "a3", "a4"};
    std::vector<std::pair<std::string, unsigned>> pattern;
    for (int k = 0; k < 4; ++k) {
        s.circuit.add(ElementKind::hwp, deg_to_rad(kNoon8AnalyzerDeg[k] / 2.0), {leaves[k]});
        pattern.emplace_back(std::string(leaves[k]) + "_h", 1);
        pattern.emplace_back(std::string(leaves[k]) + "_v", 1);
    }
    s.pattern = DetectionPattern::pnr(pattern);
    return s;
}

inline HeraldOutcome herald_noon2(const PureState &s, PolBasis basis) {
    return run_scheme(noon2_scheme(basis), s);
}

inline HeraldOutcome herald_noon2(const Ensemble &e, PolBasis basis) {
    return run_scheme(noon2_scheme(basis), e);
}

inline HeraldOutcome herald_noon4(const PureState &s) { return run_scheme(noon4_scheme(), s); }

inline HeraldOutcome herald_noon8(const PureState &s) { return run_scheme(noon8_scheme(), s); }

/// Detection operator of a scheme carried back to the prepared input state:
/// the product of a^n / sqrt(n!) over the pattern, conjugated through the
/// circuit. When the pattern absorbs every photon entering the circuit,
/// applying it to prepare_input(...) gives the unnormalized conditional state
/// with the circuit's modes empty. Zero-count entries contribute no factor.
inline OpPolynomial scheme_operator(const HeraldScheme &scheme, const ModeRegistry &prepared) {
    if (scheme.pattern.model != DetectorModel::pnr) {
        throw std::invalid_argument("scheme_operator needs a photon-number-resolving pattern");
    }
    std::vector<ModeLabel> factors;
    double norm = 1.0;
    for (const auto &[label, n] : scheme.pattern.counts) {
        if (!label.tag.empty() || prepared.covered_by(label).size() != 1) {
            throw std::invalid_argument("scheme_operator needs untagged modes");
        }
        for (unsigned k = 0; k < n; ++k) {
            factors.push_back(label);
        }
        // <n| = <0| a^n / sqrt(n!)
        norm *= std::sqrt(detail::factorial(n));
    }
    const OpPolynomial detection = OpPolynomial::product_of(prepared, factors).scaled(1.0 / norm);
    return back_propagate(detection, circuit_unitary(scheme.circuit, prepared));
}

} // namespace noonsim
