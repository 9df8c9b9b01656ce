#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noonsim/mode.hpp"

namespace noonsim {

using Amplitude = std::complex<double>;

/// Photon count per mode, in registry order.
using OccupationVector = std::vector<unsigned>;

/// Terms with |amplitude|^2 below this are never stored.
inline constexpr double kPruneTolerance = 1e-24;

/// Raised when a state with zero norm is normalized, i.e. when conditioning
/// on an event that cannot happen.
class ZeroStateError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

inline unsigned total_photons(const OccupationVector &occ) {
    return std::accumulate(occ.begin(), occ.end(), 0u);
}

/**
 * Sparse multimode Fock state: a map from occupation vectors to complex
 * amplitudes over an explicit mode registry.
 *
 * Terms are kept in lexicographic occupation order, so iteration and
 * serialization are deterministic. `add` is the only mutator and is meant
 * for building a state; every operation below returns a new value.
 */
class PureState {
  public:
    using TermMap = std::map<OccupationVector, Amplitude>;

    PureState() = default;
    explicit PureState(ModeRegistry registry) : registry_(std::move(registry)) {}

    static PureState vacuum(ModeRegistry registry) {
        OccupationVector zero(registry.size(), 0);
        return basis(std::move(registry), std::move(zero));
    }

    static PureState basis(ModeRegistry registry, OccupationVector occ, Amplitude amp = 1.0) {
        PureState s(std::move(registry));
        s.add(std::move(occ), amp);
        return s;
    }

    const ModeRegistry &registry() const { return registry_; }
    const TermMap &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    Amplitude amplitude(const OccupationVector &occ) const {
        auto it = terms_.find(occ);
        return it == terms_.end() ? Amplitude{} : it->second;
    }

    /// Accumulates `amp` onto the basis ket `occ`, pruning tiny results.
    void add(const OccupationVector &occ, Amplitude amp) {
        if (occ.size() != registry_.size()) {
            throw RegistryError("occupation vector length " + std::to_string(occ.size()) +
                                " does not match registry size " +
                                std::to_string(registry_.size()));
        }
        auto [it, inserted] = terms_.try_emplace(occ, amp);
        if (!inserted) {
            it->second += amp;
        }
        if (std::norm(it->second) < kPruneTolerance) {
            terms_.erase(it);
        }
    }

    double norm_squared() const {
        double acc = 0.0;
        for (const auto &[occ, amp] : terms_) {
            acc += std::norm(amp);
        }
        return acc;
    }

    double norm() const { return std::sqrt(norm_squared()); }

    PureState scaled(Amplitude factor) const {
        PureState out(registry_);
        for (const auto &[occ, amp] : terms_) {
            out.add(occ, amp * factor);
        }
        return out;
    }

    friend PureState operator+(const PureState &x, const PureState &y) {
        require_same_registry(x.registry_, y.registry_, "state sum");
        PureState out = x;
        for (const auto &[occ, amp] : y.terms_) {
            out.add(occ, amp);
        }
        return out;
    }

    friend PureState operator-(const PureState &x, const PureState &y) {
        return x + y.scaled(-1.0);
    }

  private:
    ModeRegistry registry_;
    TermMap terms_;
};

/// Maximum absolute amplitude difference; registries must match.
inline double max_abs_difference(const PureState &x, const PureState &y) {
    require_same_registry(x.registry(), y.registry(), "max_abs_difference");
    double worst = 0.0;
    const PureState diff = x - y;
    for (const auto &[occ, amp] : diff.terms()) {
        worst = std::max(worst, std::abs(amp));
    }
    return worst;
}

inline PureState apply_annihilation(const PureState &s, const ModeLabel &mode) {
    const std::size_t k = s.registry().index_of(mode);
    PureState out(s.registry());
    for (const auto &[occ, amp] : s.terms()) {
        if (occ[k] == 0) {
            continue;
        }
        OccupationVector next = occ;
        next[k] -= 1;
        out.add(next, amp * std::sqrt(static_cast<double>(occ[k])));
    }
    return out;
}

inline PureState apply_creation(const PureState &s, const ModeLabel &mode) {
    const std::size_t k = s.registry().index_of(mode);
    PureState out(s.registry());
    for (const auto &[occ, amp] : s.terms()) {
        OccupationVector next = occ;
        next[k] += 1;
        out.add(next, amp * std::sqrt(static_cast<double>(next[k])));
    }
    return out;
}

/// <s1|s2>, conjugate-linear in the first argument.
inline Amplitude inner_product(const PureState &s1, const PureState &s2) {
    require_same_registry(s1.registry(), s2.registry(), "inner_product");
    const auto &small = s1.size() <= s2.size() ? s1 : s2;
    const auto &large = s1.size() <= s2.size() ? s2 : s1;
    Amplitude acc{};
    for (const auto &[occ, amp] : small.terms()) {
        auto other = large.amplitude(occ);
        acc += (&small == &s1) ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return acc;
}

inline PureState normalize(const PureState &s) {
    const double n = s.norm();
    if (n == 0.0) {
        throw ZeroStateError("cannot normalize the zero state (conditioning event has probability 0)");
    }
    return s.scaled(1.0 / n);
}

/// Tensor product over the union of two disjoint registries.
inline PureState tensor(const PureState &s1, const PureState &s2) {
    std::vector<ModeLabel> labels = s1.registry().labels();
    for (const auto &l : s2.registry().labels()) {
        if (s1.registry().contains(l)) {
            throw RegistryError("tensor: mode '" + l.name() + "' appears in both factors");
        }
        labels.push_back(l);
    }
    ModeRegistry joint(std::move(labels));
    std::vector<std::size_t> pos1, pos2;
    for (const auto &l : s1.registry().labels()) {
        pos1.push_back(joint.index_of(l));
    }
    for (const auto &l : s2.registry().labels()) {
        pos2.push_back(joint.index_of(l));
    }
    PureState out(joint);
    for (const auto &[o1, a1] : s1.terms()) {
        for (const auto &[o2, a2] : s2.terms()) {
            OccupationVector occ(joint.size(), 0);
            for (std::size_t i = 0; i < o1.size(); ++i) {
                occ[pos1[i]] = o1[i];
            }
            for (std::size_t i = 0; i < o2.size(); ++i) {
                occ[pos2[i]] = o2[i];
            }
            out.add(occ, a1 * a2);
        }
    }
    return out;
}

/// Adds vacuum modes to a state.
inline PureState extend_with_vacuum(const PureState &s, std::vector<ModeLabel> extra) {
    return tensor(s, PureState::vacuum(ModeRegistry(std::move(extra))));
}

/// Renames every mode through `rename`; the result must stay injective.
inline PureState relabel(const PureState &s,
                         const std::function<ModeLabel(const ModeLabel &)> &rename) {
    std::vector<ModeLabel> renamed;
    for (const auto &l : s.registry().labels()) {
        renamed.push_back(rename(l));
    }
    ModeRegistry target(renamed);
    std::vector<std::size_t> pos;
    for (const auto &l : renamed) {
        pos.push_back(target.index_of(l));
    }
    PureState out(target);
    for (const auto &[occ, amp] : s.terms()) {
        OccupationVector next(occ.size(), 0);
        for (std::size_t i = 0; i < occ.size(); ++i) {
            next[pos[i]] = occ[i];
        }
        out.add(next, amp);
    }
    return out;
}

inline PureState rename_spatial(const PureState &s, const std::string &from,
                                const std::string &to) {
    return relabel(s, [&](const ModeLabel &l) {
        return l.spatial == from ? ModeLabel{to, l.pol, l.tag} : l;
    });
}

/// Drops modes that hold a definite photon number in every term. Throws if
/// any dropped mode is entangled with the rest (differs between terms).
inline PureState drop_definite_modes(const PureState &s, const std::vector<ModeLabel> &drop) {
    std::vector<bool> dropped(s.registry().size(), false);
    for (const auto &l : drop) {
        dropped[s.registry().index_of(l)] = true;
    }
    std::vector<ModeLabel> keep;
    for (std::size_t i = 0; i < dropped.size(); ++i) {
        if (!dropped[i]) {
            keep.push_back(s.registry()[i]);
        }
    }
    PureState out{ModeRegistry(keep)};
    const OccupationVector *reference = nullptr;
    for (const auto &[occ, amp] : s.terms()) {
        if (reference == nullptr) {
            reference = &occ;
        }
        OccupationVector next;
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (dropped[i]) {
                if (occ[i] != (*reference)[i]) {
                    throw RegistryError("drop_definite_modes: mode '" +
                                        s.registry()[i].name() +
                                        "' has no definite photon number");
                }
            } else {
                next.push_back(occ[i]);
            }
        }
        out.add(next, amp);
    }
    return out;
}

/// Distribution of the total photon count held by the modes covered by
/// `modes` (an empty list means every mode). Probabilities are |amp|^2
/// weights, so they sum to the squared norm of `s`.
inline std::map<unsigned, double> photon_number_distribution(const PureState &s,
                                                             const std::vector<ModeLabel> &modes = {}) {
    std::vector<std::size_t> idx;
    if (modes.empty()) {
        idx.resize(s.registry().size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
        for (const auto &m : modes) {
            auto cov = s.registry().covered_by(m);
            if (cov.empty()) {
                throw RegistryError("mode '" + m.name() + "' is not in the registry");
            }
            idx.insert(idx.end(), cov.begin(), cov.end());
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }
    std::map<unsigned, double> out;
    for (const auto &[occ, amp] : s.terms()) {
        unsigned n = 0;
        for (auto i : idx) {
            n += occ[i];
        }
        out[n] += std::norm(amp);
    }
    return out;
}

/// One weighted branch of a mixture.
struct EnsembleComponent {
    double weight = 0.0;
    PureState state;
};

/**
 * Incoherent mixture of pure states over a single shared registry. Weights
 * are nonnegative and sum to one within 1e-12; zero-weight components are
 * dropped on construction.
 */
class Ensemble {
  public:
    Ensemble() = default;

    explicit Ensemble(std::vector<EnsembleComponent> components) {
        double total = 0.0;
        for (auto &c : components) {
            if (!(c.weight >= 0.0)) {
                throw std::invalid_argument("ensemble weights must be nonnegative");
            }
            total += c.weight;
            if (c.weight == 0.0) {
                continue;
            }
            if (!components_.empty()) {
                require_same_registry(components_.front().state.registry(), c.state.registry(),
                                      "ensemble");
            }
            components_.push_back(std::move(c));
        }
        if (components_.empty()) {
            throw std::invalid_argument("ensemble needs at least one component of positive weight");
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("ensemble weights sum to " + std::to_string(total) +
                                        ", expected 1");
        }
    }

    static Ensemble pure(PureState s) { return Ensemble({{1.0, std::move(s)}}); }

    const std::vector<EnsembleComponent> &components() const { return components_; }
    const ModeRegistry &registry() const { return components_.front().state.registry(); }
    std::size_t size() const { return components_.size(); }
    bool is_pure() const { return components_.size() == 1; }

  private:
    std::vector<EnsembleComponent> components_;
};

} // namespace noonsim
