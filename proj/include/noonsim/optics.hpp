#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noonsim/fock.hpp"
#include "noonsim/op_poly.hpp"
#include "noonsim/unitary.hpp"

namespace noonsim {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Jones matrices act on (h, v) in that order.
using JonesMatrix = Eigen::Matrix2cd;

inline JonesMatrix rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    JonesMatrix r;
    r << c, -s, s, c;
    return r;
}

/// Half-wave plate with fast axis at `angle`: [[cos2t, sin2t], [sin2t, -cos2t]].
inline JonesMatrix hwp(double angle) {
    const double c = std::cos(2.0 * angle), s = std::sin(2.0 * angle);
    JonesMatrix m;
    m << c, s, s, -c;
    return m;
}

/// Quarter-wave plate with fast axis at `angle`: R(t) diag(1, i) R(-t).
inline JonesMatrix qwp(double angle) {
    JonesMatrix d = JonesMatrix::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = Amplitude(0.0, 1.0);
    return rotation(angle) * d * rotation(-angle);
}

/// Birefringent phase between the polarizations: diag(1, e^{i theta_b}).
inline JonesMatrix phase_plate(double theta_b) {
    JonesMatrix m = JonesMatrix::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = std::polar(1.0, theta_b);
    return m;
}

/// Lossless beam splitter on two spatial modes: [[t, i r], [i r, t]] with
/// t = sqrt(1 - R), r = sqrt(R). R = 1/2 is the balanced splitter.
inline Eigen::Matrix2cd beamsplitter(double reflectivity) {
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
        throw std::invalid_argument("beamsplitter reflectivity must lie in [0, 1]");
    }
    const double t = std::sqrt(1.0 - reflectivity), r = std::sqrt(reflectivity);
    Eigen::Matrix2cd m;
    m << t, Amplitude(0.0, r), Amplitude(0.0, r), t;
    return m;
}

/// Polarizing beam splitter on (x_h, x_v, y_h, y_v): h is transmitted and v
/// reflected, both with phase +1, so x_v and y_v swap.
inline Eigen::Matrix4cd pbs() {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1.0;
    m(3, 1) = 1.0;
    m(2, 2) = 1.0;
    m(1, 3) = 1.0;
    return m;
}

/// Columns are the Jones vectors of the basis' (plus, minus) polarizations.
inline JonesMatrix basis_vectors(PolBasis basis) {
    const double s = 1.0 / std::sqrt(2.0);
    const Amplitude i(0.0, 1.0);
    JonesMatrix m;
    switch (basis) {
    case PolBasis::hv: m = JonesMatrix::Identity(); break;
    case PolBasis::pm: m << s, s, s, -s; break;
    case PolBasis::rl: m << s, s, s * i, -s * i; break;
    }
    return m;
}

/**
 * Places `local` on `targets` and the identity elsewhere. An untagged target
 * label acts on every tagged copy of that mode: the block is repeated once
 * per tag, since optical elements do not see internal labels.
 */
inline ModeUnitary embed(const Eigen::MatrixXcd &local, const std::vector<ModeLabel> &targets,
                         const ModeRegistry &registry) {
    const auto k = targets.size();
    if (static_cast<std::size_t>(local.rows()) != k || static_cast<std::size_t>(local.cols()) != k) {
        throw RegistryError("embed: " + std::to_string(k) + " targets for a " +
                            std::to_string(local.rows()) + "x" + std::to_string(local.cols()) +
                            " element");
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (targets[i].covers(targets[j]) || targets[j].covers(targets[i])) {
                throw RegistryError("embed: target '" + targets[i].name() + "' used twice");
            }
        }
    }
    ModeUnitary U = ModeUnitary::identity(registry);
    const auto first = registry.covered_by(targets[0]);
    if (first.empty()) {
        throw RegistryError("embed: mode '" + targets[0].name() + "' is not in the registry");
    }
    for (auto f : first) {
        const std::string &tag = registry[f].tag;
        std::vector<Eigen::Index> idx;
        for (const auto &t : targets) {
            const ModeLabel concrete = t.tag.empty() ? t.with_tag(tag) : t;
            idx.push_back(static_cast<Eigen::Index>(registry.index_of(concrete)));
        }
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) {
                U.matrix(idx[r], idx[c]) = local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
    }
    return U;
}

/// Polarization element on spatial path `spatial` (its h and v modes).
inline ModeUnitary embed_polarization(const JonesMatrix &jones, const std::string &spatial,
                                      const ModeRegistry &registry) {
    return embed(jones, {ModeLabel{spatial, Polarization::h}, ModeLabel{spatial, Polarization::v}},
                 registry);
}

/// Two-port spatial element applied identically to each polarization present
/// on path `x`.
inline ModeUnitary embed_spatial_pair(const Eigen::Matrix2cd &local, const std::string &x,
                                      const std::string &y, const ModeRegistry &registry) {
    if (x == y) {
        throw RegistryError("embed_spatial_pair: ports must differ");
    }
    std::vector<Polarization> pols;
    for (const auto &l : registry.labels()) {
        if (l.spatial == x && std::find(pols.begin(), pols.end(), l.pol) == pols.end()) {
            pols.push_back(l.pol);
        }
    }
    if (pols.empty()) {
        throw RegistryError("embed_spatial_pair: no modes on path '" + x + "'");
    }
    ModeUnitary U = ModeUnitary::identity(registry);
    for (auto pol : pols) {
        U = compose(embed(local, {ModeLabel{x, pol}, ModeLabel{y, pol}}, registry), U);
    }
    return U;
}

inline ModeUnitary embed_pbs(const std::string &x, const std::string &y, const ModeRegistry &registry) {
    return embed(pbs(),
                 {ModeLabel{x, Polarization::h}, ModeLabel{x, Polarization::v},
                  ModeLabel{y, Polarization::h}, ModeLabel{y, Polarization::v}},
                 registry);
}

namespace detail {

inline double factorial(unsigned n) {
    double f = 1.0;
    for (unsigned k = 2; k <= n; ++k) {
        f *= k;
    }
    return f;
}

/// Image of one basis ket of a block of modes under the lift of `block`.
inline std::map<OccupationVector, Amplitude> lift_ket(const Eigen::MatrixXcd &block,
                                                      const OccupationVector &occ) {
    const auto k = occ.size();
    // Coefficients of products of creation operators, not yet normalized.
    std::map<OccupationVector, Amplitude> poly{{OccupationVector(k, 0), 1.0}};
    double input_norm = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        input_norm *= factorial(occ[i]);
        for (unsigned n = 0; n < occ[i]; ++n) {
            std::map<OccupationVector, Amplitude> next;
            for (const auto &[e, c] : poly) {
                for (std::size_t j = 0; j < k; ++j) {
                    const Amplitude u = block(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                    if (u == Amplitude{}) {
                        continue;
                    }
                    OccupationVector e2 = e;
                    e2[j] += 1;
                    next[e2] += c * u;
                }
            }
            poly = std::move(next);
        }
    }
    std::map<OccupationVector, Amplitude> out;
    for (const auto &[e, c] : poly) {
        double f = 1.0;
        for (auto n : e) {
            f *= factorial(n);
        }
        out[e] = c * std::sqrt(f / input_norm);
    }
    return out;
}

/// Groups the modes a unitary actually touches into independent blocks.
inline std::vector<std::vector<std::size_t>> active_blocks(const Eigen::MatrixXcd &M) {
    const auto n = static_cast<std::size_t>(M.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<bool> active(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Amplitude u = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const Amplitude id = (i == j) ? 1.0 : 0.0;
            if (u != id) {
                active[i] = active[j] = true;
                if (i != j && u != Amplitude{}) {
                    parent[find(i)] = find(j);
                }
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
            groups[find(i)].push_back(i);
        }
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto &[root, members] : groups) {
        out.push_back(std::move(members));
    }
    return out;
}

} // namespace detail

/**
 * Lifts a mode unitary to Fock space: every creation operator a_i^dagger in
 * the product form of each basis ket becomes sum_j U(j, i) a_j^dagger.
 *
 * Modes the unitary leaves alone are passed through, and each independent
 * block of touched modes is expanded separately with per-pattern caching.
 */
inline PureState apply_unitary(const ModeUnitary &U, const PureState &s) {
    require_same_registry(U.registry, s.registry(), "apply_unitary");
    PureState current = s;
    for (const auto &block : detail::active_blocks(U.matrix)) {
        const auto k = static_cast<Eigen::Index>(block.size());
        Eigen::MatrixXcd local(k, k);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index c = 0; c < k; ++c) {
                local(r, c) = U.matrix(static_cast<Eigen::Index>(block[static_cast<std::size_t>(r)]),
                                       static_cast<Eigen::Index>(block[static_cast<std::size_t>(c)]));
            }
        }
        std::map<OccupationVector, std::map<OccupationVector, Amplitude>> cache;
        PureState next(s.registry());
        for (const auto &[occ, amp] : current.terms()) {
            OccupationVector sub(block.size());
            for (std::size_t i = 0; i < block.size(); ++i) {
                sub[i] = occ[block[i]];
            }
            auto it = cache.find(sub);
            if (it == cache.end()) {
                it = cache.emplace(sub, detail::lift_ket(local, sub)).first;
            }
            for (const auto &[image, c] : it->second) {
                OccupationVector out = occ;
                for (std::size_t i = 0; i < block.size(); ++i) {
                    out[block[i]] = image[i];
                }
                next.add(out, amp * c);
            }
        }
        current = std::move(next);
    }
    return current;
}

enum class ElementKind { hwp, qwp, phase, bs, pbs };

inline std::string_view to_string(ElementKind k) {
    switch (k) {
    case ElementKind::hwp: return "hwp";
    case ElementKind::qwp: return "qwp";
    case ElementKind::phase: return "phase";
    case ElementKind::bs: return "bs";
    case ElementKind::pbs: return "pbs";
    }
    return "";
}

/**
 * One optical element. `parameter` is the fast-axis angle (hwp, qwp, in
 * radians), the birefringent phase (phase) or the reflectivity (bs); pbs
 * takes none.
 *
 * Targets: a polarization element takes one spatial path ("a") or its two
 * modes ("a_h", "a_v"); bs takes two spatial paths, or two explicit modes to
 * act on a single polarization; pbs takes two spatial paths.
 */
struct Element {
    ElementKind kind;
    double parameter = 0.0;
    std::vector<std::string> targets;
};

inline ModeUnitary element_unitary(const Element &el, const ModeRegistry &registry) {
    auto need = [&](std::size_t n) {
        if (el.targets.size() != n) {
            throw RegistryError(std::string(to_string(el.kind)) + " element expects " +
                                std::to_string(n) + " target(s), got " +
                                std::to_string(el.targets.size()));
        }
    };
    auto polarization_element = [&](const JonesMatrix &jones) {
        if (el.targets.size() == 1) {
            return embed_polarization(jones, el.targets[0], registry);
        }
        need(2);
        return embed(jones, {ModeLabel::parse(el.targets[0]), ModeLabel::parse(el.targets[1])},
                     registry);
    };
    switch (el.kind) {
    case ElementKind::hwp: return polarization_element(hwp(el.parameter));
    case ElementKind::qwp: return polarization_element(qwp(el.parameter));
    case ElementKind::phase: return polarization_element(phase_plate(el.parameter));
    case ElementKind::bs: {
        need(2);
        const auto x = ModeLabel::parse(el.targets[0]);
        const auto y = ModeLabel::parse(el.targets[1]);
        if (x.pol == Polarization::none && y.pol == Polarization::none && x.tag.empty() &&
            y.tag.empty()) {
            return embed_spatial_pair(beamsplitter(el.parameter), x.spatial, y.spatial, registry);
        }
        return embed(beamsplitter(el.parameter), {x, y}, registry);
    }
    case ElementKind::pbs: need(2); return embed_pbs(el.targets[0], el.targets[1], registry);
    }
    throw std::logic_error("unknown element kind");
}

/// Ordered list of optical elements; element 0 acts first.
struct Circuit {
    std::vector<Element> elements;

    Circuit &add(ElementKind kind, double parameter, std::vector<std::string> targets) {
        elements.push_back({kind, parameter, std::move(targets)});
        return *this;
    }
};

inline ModeUnitary circuit_unitary(const Circuit &circuit, const ModeRegistry &registry) {
    ModeUnitary U = ModeUnitary::identity(registry);
    for (const auto &el : circuit.elements) {
        U = compose(element_unitary(el, registry), U);
    }
    return U;
}

/// Applies the elements one at a time, which keeps every lift block small.
inline PureState apply_circuit(const Circuit &circuit, const PureState &s) {
    PureState out = s;
    for (const auto &el : circuit.elements) {
        out = apply_unitary(element_unitary(el, s.registry()), out);
    }
    return out;
}

inline Ensemble apply_circuit(const Circuit &circuit, const Ensemble &e) {
    std::vector<EnsembleComponent> comps;
    for (const auto &c : e.components()) {
        comps.push_back({c.weight, apply_circuit(circuit, c.state)});
    }
    return Ensemble(std::move(comps));
}

inline Ensemble apply_unitary(const ModeUnitary &U, const Ensemble &e) {
    std::vector<EnsembleComponent> comps;
    for (const auto &c : e.components()) {
        comps.push_back({c.weight, apply_unitary(U, c.state)});
    }
    return Ensemble(std::move(comps));
}

/**
 * Re-expresses the h/v modes of path `spatial` in `basis`: the returned state
 * uses the basis' mode labels (e.g. b_r, b_l) and equals `s` as a physical
 * state.
 */
inline PureState express_in_basis(const PureState &s, const std::string &spatial, PolBasis basis) {
    if (basis == PolBasis::hv) {
        return s;
    }
    // s = Phi(C) s', where C's columns are the new basis vectors.
    const ModeUnitary inverse =
        embed_polarization(basis_vectors(basis).adjoint(), spatial, s.registry());
    const PureState rotated = apply_unitary(inverse, s);
    const auto [plus, minus] = basis_polarizations(basis);
    return relabel(rotated, [&, plus = plus, minus = minus](const ModeLabel &l) {
        if (l.spatial != spatial) {
            return l;
        }
        if (l.pol == Polarization::h) {
            return ModeLabel{l.spatial, plus, l.tag};
        }
        if (l.pol == Polarization::v) {
            return ModeLabel{l.spatial, minus, l.tag};
        }
        return l;
    });
}

/// Inverse of express_in_basis: maps basis-labelled modes back to h/v.
inline PureState express_in_hv(const PureState &s, const std::string &spatial, PolBasis basis) {
    if (basis == PolBasis::hv) {
        return s;
    }
    const auto [plus, minus] = basis_polarizations(basis);
    const PureState hv_labels = relabel(s, [&, plus = plus, minus = minus](const ModeLabel &l) {
        if (l.spatial != spatial) {
            return l;
        }
        if (l.pol == plus) {
            return ModeLabel{l.spatial, Polarization::h, l.tag};
        }
        if (l.pol == minus) {
            return ModeLabel{l.spatial, Polarization::v, l.tag};
        }
        return l;
    });
    return apply_unitary(embed_polarization(basis_vectors(basis), spatial, hv_labels.registry()),
                         hv_labels);
}

/// Rewrites a polynomial in the (plus, minus) operators of `basis` on path
/// `spatial` as a polynomial over `target` (which holds that path's h and v
/// modes). The annihilator of Jones vector e is sum_k conj(e_k) a_k.
inline OpPolynomial axis_polynomial_in_hv(const OpPolynomial &p, const std::string &spatial,
                                          PolBasis basis, const ModeRegistry &target) {
    const JonesMatrix C = basis_vectors(basis);
    const auto [plus, minus] = basis_polarizations(basis);
    const ModeLabel h{spatial, Polarization::h}, v{spatial, Polarization::v};
    std::vector<OpPolynomial> images;
    for (const auto &l : p.registry().labels()) {
        int col = -1;
        if (l.spatial == spatial && l.pol == plus) {
            col = 0;
        } else if (l.spatial == spatial && l.pol == minus) {
            col = 1;
        }
        if (col < 0) {
            images.push_back(OpPolynomial::mode(target, l));
            continue;
        }
        images.push_back(OpPolynomial::linear(
            target, {{h, std::conj(C(0, col))}, {v, std::conj(C(1, col))}}));
    }
    return substitute(p, target, images);
}

} // namespace noonsim
