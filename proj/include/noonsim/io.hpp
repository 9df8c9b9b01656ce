#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noonsim/experiments.hpp"
#include "noonsim/fock.hpp"
#include "noonsim/heralding.hpp"
#include "noonsim/op_poly.hpp"
#include "noonsim/optics.hpp"
#include "noonsim/pdc.hpp"

namespace noonsim::io {

using json = nlohmann::ordered_json;

/// A configuration document that does not match its schema or holds an
/// out-of-range value.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const json &field(const json &j, const char *key, const std::string &where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

inline double number(const json &j, const char *key, const std::string &where) {
    const auto &v = field(j, key, where);
    if (!v.is_number()) {
        throw ConfigError(where + ": field '" + key + "' must be a number");
    }
    return v.get<double>();
}

inline double number_or(const json &j, const char *key, double fallback, const std::string &where) {
    return j.is_object() && j.contains(key) ? number(j, key, where) : fallback;
}

inline unsigned count(const json &j, const char *key, const std::string &where) {
    const auto &v = field(j, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(where + ": field '" + key + "' must be a nonnegative integer");
    }
    return v.get<unsigned>();
}

inline std::string text(const json &j, const char *key, const std::string &where) {
    const auto &v = field(j, key, where);
    if (!v.is_string()) {
        throw ConfigError(where + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline std::vector<std::string> strings(const json &j, const char *key, const std::string &where) {
    const auto &v = field(j, key, where);
    if (!v.is_array()) {
        throw ConfigError(where + ": field '" + key + "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto &e : v) {
        if (!e.is_string()) {
            throw ConfigError(where + ": field '" + key + "' must be an array of strings");
        }
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------- states

inline json to_json(const PureState &s) {
    json terms = json::array();
    for (const auto &[occ, amp] : s.terms()) {
        terms.push_back({{"occ", occ}, {"re", amp.real()}, {"im", amp.imag()}});
    }
    return {{"modes", s.registry().names()}, {"terms", std::move(terms)}};
}

inline PureState state_from_json(const json &j) {
    const std::string where = "state";
    try {
        const auto reg = ModeRegistry::from_names(detail::strings(j, "modes", where));
        // Modes may be listed in any order; re-sort occupations to match.
        const auto listed = detail::strings(j, "modes", where);
        std::vector<std::size_t> pos;
        for (const auto &n : listed) {
            pos.push_back(reg.index_of(ModeLabel::parse(n)));
        }
        PureState s(reg);
        for (const auto &t : detail::field(j, "terms", where)) {
            const auto &occ = detail::field(t, "occ", where);
            if (!occ.is_array() || occ.size() != listed.size()) {
                throw ConfigError("state: each 'occ' needs one count per mode");
            }
            OccupationVector o(reg.size(), 0);
            for (std::size_t i = 0; i < listed.size(); ++i) {
                if (!occ[i].is_number_integer() || occ[i].get<long long>() < 0) {
                    throw ConfigError("state: occupations must be nonnegative integers");
                }
                o[pos[i]] = occ[i].get<unsigned>();
            }
            s.add(o, {detail::number(t, "re", where), detail::number_or(t, "im", 0.0, where)});
        }
        return s;
    } catch (const RegistryError &e) {
        throw ConfigError(std::string("state: ") + e.what());
    }
}

inline json to_json(const Ensemble &e) {
    json comps = json::array();
    for (const auto &c : e.components()) {
        comps.push_back({{"weight", c.weight}, {"state", to_json(c.state)}});
    }
    return {{"components", std::move(comps)}};
}

// ------------------------------------------------------------ polynomials

inline json to_json(const OpPolynomial &p) {
    json monos = json::array();
    for (const auto &[e, c] : p.coefficients()) {
        monos.push_back({{"exp", e}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"modes", p.registry().names()}, {"monomials", std::move(monos)}, {"text", p.to_string()}};
}

inline OpPolynomial poly_from_json(const json &j) {
    const std::string where = "polynomial";
    const auto listed = detail::strings(j, "modes", where);
    const auto reg = ModeRegistry::from_names(listed);
    std::vector<std::size_t> pos;
    for (const auto &n : listed) {
        pos.push_back(reg.index_of(ModeLabel::parse(n)));
    }
    OpPolynomial p(reg);
    for (const auto &m : detail::field(j, "monomials", where)) {
        const auto &exp = detail::field(m, "exp", where);
        if (!exp.is_array() || exp.size() != listed.size()) {
            throw ConfigError("polynomial: each 'exp' needs one power per mode");
        }
        ExponentVector e(reg.size(), 0);
        for (std::size_t i = 0; i < listed.size(); ++i) {
            e[pos[i]] = exp[i].get<unsigned>();
        }
        p.add(e, {detail::number(m, "re", where), detail::number_or(m, "im", 0.0, where)});
    }
    return p;
}

// --------------------------------------------------------------- circuits

inline json to_json(const Element &el) {
    json j = {{"kind", std::string(to_string(el.kind))}};
    switch (el.kind) {
    case ElementKind::hwp:
    case ElementKind::qwp: j["angle_deg"] = rad_to_deg(el.parameter); break;
    case ElementKind::phase: j["theta_rad"] = el.parameter; break;
    case ElementKind::bs: j["r"] = el.parameter; break;
    case ElementKind::pbs: break;
    }
    j["targets"] = el.targets;
    return j;
}

inline json to_json(const Circuit &c) {
    json arr = json::array();
    for (const auto &el : c.elements) {
        arr.push_back(to_json(el));
    }
    return arr;
}

/// Circuit files list elements in application order; waveplate angles are
/// in degrees, birefringent phases in radians.
inline Circuit circuit_from_json(const json &j) {
    if (!j.is_array()) {
        throw ConfigError("circuit must be an array of elements");
    }
    Circuit c;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto &e = j[i];
        const std::string where = "circuit element " + std::to_string(i);
        const auto kind = detail::text(e, "kind", where);
        auto targets = detail::strings(e, "targets", where);
        if (kind == "hwp") {
            c.add(ElementKind::hwp, deg_to_rad(detail::number(e, "angle_deg", where)), targets);
        } else if (kind == "qwp") {
            c.add(ElementKind::qwp, deg_to_rad(detail::number(e, "angle_deg", where)), targets);
        } else if (kind == "phase") {
            c.add(ElementKind::phase, detail::number(e, "theta_rad", where), targets);
        } else if (kind == "bs") {
            const double r = detail::number_or(e, "r", 0.5, where);
            if (!(r >= 0.0 && r <= 1.0)) {
                throw ConfigError(where + ": reflectivity must lie in [0, 1]");
            }
            c.add(ElementKind::bs, r, targets);
        } else if (kind == "pbs") {
            c.add(ElementKind::pbs, 0.0, targets);
        } else {
            throw ConfigError(where + ": unknown element kind '" + kind + "'");
        }
    }
    return c;
}

// ---------------------------------------------------------------- sources

/// {"kind":"pdc","tau":..,"n_max":..} | {"kind":"singlet","n":..} |
/// {"kind":"eq4","alpha":..} | {"kind":"state", <state json>}
inline Ensemble source_from_json(const json &j) {
    const std::string where = "source";
    const auto kind = detail::text(j, "kind", where);
    if (kind == "pdc") {
        const double tau = detail::number(j, "tau", where);
        const unsigned n_max = j.contains("n_max") ? detail::count(j, "n_max", where) : 4u;
        if (!(tau >= 0.0)) {
            throw ConfigError("source: tau must be nonnegative");
        }
        if (n_max > 12) {
            throw ConfigError("source: n_max above 12 is not supported");
        }
        return Ensemble::pure(pdc_state({tau, n_max}).state);
    }
    if (kind == "singlet") {
        const unsigned n = detail::count(j, "n", where);
        if (n > 12) {
            throw ConfigError("source: singlet n above 12 is not supported");
        }
        return Ensemble::pure(singlet_term(n));
    }
    if (kind == "eq4" || kind == "two_pair_mixture") {
        const double alpha = detail::number(j, "alpha", where);
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw ConfigError("source: alpha must lie in [0, 1]");
        }
        return partially_distinguishable_two_pairs({alpha});
    }
    if (kind == "state") {
        return Ensemble::pure(state_from_json(j));
    }
    throw ConfigError("source: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------- herald

inline DetectionPattern pattern_from_json(const json &j) {
    const std::string where = "pattern";
    DetectionPattern p;
    const auto model = j.contains("model") ? detail::text(j, "model", where) : std::string("pnr");
    if (model == "pnr") {
        p.model = DetectorModel::pnr;
    } else if (model == "threshold") {
        p.model = DetectorModel::threshold;
    } else {
        throw ConfigError("pattern: model must be 'pnr' or 'threshold'");
    }
    const auto &counts = detail::field(j, "counts", where);
    if (!counts.is_object() || counts.empty()) {
        throw ConfigError("pattern: 'counts' must be a nonempty object of mode -> count");
    }
    try {
        for (const auto &[name, n] : counts.items()) {
            if (!n.is_number_integer() || n.get<long long>() < 0) {
                throw ConfigError("pattern: count for '" + name + "' must be a nonnegative integer");
            }
            p.counts.emplace_back(ModeLabel::parse(name), n.get<unsigned>());
        }
        p.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("pattern: ") + e.what());
    }
    return p;
}

inline json to_json(const DetectionPattern &p) {
    json counts = json::object();
    for (const auto &[label, n] : p.counts) {
        counts[label.name()] = n;
    }
    return {{"model", p.model == DetectorModel::pnr ? "pnr" : "threshold"}, {"counts", counts}};
}

inline PolBasis basis_from_json(const json &j, const char *key, PolBasis fallback,
                                const std::string &where) {
    if (!j.is_object() || !j.contains(key)) {
        return fallback;
    }
    PolBasis b;
    if (!parse_basis(detail::text(j, key, where), b)) {
        throw ConfigError(where + ": '" + key + "' must be one of hv, pm, rl");
    }
    return b;
}

/// {"scheme":"noon2","basis":"pm"} | {"scheme":"noon4"} | {"scheme":"noon8"} |
/// {"scheme":"interferometer"} |
/// {"scheme":"custom","circuit":[...],"pattern":{...},"vacuum_ports":[...]}
inline HeraldScheme scheme_from_json(const json &j) {
    const std::string where = "herald";
    const auto scheme = detail::text(j, "scheme", where);
    if (scheme == "noon2") {
        const PolBasis b = basis_from_json(j, "basis", PolBasis::pm, where);
        if (b == PolBasis::hv) {
            throw ConfigError("herald: noon2 basis must be pm or rl");
        }
        return noon2_scheme(b);
    }
    if (scheme == "noon4") {
        return noon4_scheme();
    }
    if (scheme == "noon8") {
        return noon8_scheme();
    }
    if (scheme == "interferometer") {
        return noon2_interferometer_scheme();
    }
    if (scheme == "custom") {
        HeraldScheme s;
        s.name = "custom";
        s.circuit = circuit_from_json(detail::field(j, "circuit", where));
        s.pattern = pattern_from_json(detail::field(j, "pattern", where));
        if (j.contains("vacuum_ports")) {
            s.vacuum_ports = detail::strings(j, "vacuum_ports", where);
        }
        if (j.contains("input")) {
            s.input = s.first_port = detail::text(j, "input", where);
        }
        if (j.contains("first_port")) {
            s.first_port = detail::text(j, "first_port", where);
        }
        return s;
    }
    throw ConfigError("herald: unknown scheme '" + scheme + "'");
}

inline json to_json(const HeraldOutcome &h) {
    json j = {{"probability", h.probability}};
    if (!h.conditional) {
        j["conditional"] = nullptr;
    } else if (h.conditional->is_pure()) {
        j["conditional"] = to_json(h.conditional->components().front().state);
    } else {
        j["conditional"] = to_json(*h.conditional);
    }
    return j;
}

} // namespace noonsim::io
