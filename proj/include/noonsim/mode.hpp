#pragma once

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace noonsim {

/// Raised when a mode label is unknown to a registry, or two registries
/// that must agree do not.
class RegistryError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Polarization component of a mode. `none` marks a generic (scalar) mode;
/// p/m and r/l name the diagonal and circular bases when a state is
/// expressed in them.
enum class Polarization { none, h, v, p, m, r, l };

inline std::string_view to_string(Polarization pol) {
    switch (pol) {
    case Polarization::none: return "";
    case Polarization::h: return "h";
    case Polarization::v: return "v";
    case Polarization::p: return "p";
    case Polarization::m: return "m";
    case Polarization::r: return "r";
    case Polarization::l: return "l";
    }
    return "";
}

inline bool parse_polarization(std::string_view s, Polarization &out) {
    static constexpr std::pair<std::string_view, Polarization> table[] = {
        {"h", Polarization::h}, {"v", Polarization::v}, {"p", Polarization::p},
        {"m", Polarization::m}, {"r", Polarization::r}, {"l", Polarization::l}};
    for (auto [name, pol] : table) {
        if (s == name) {
            out = pol;
            return true;
        }
    }
    return false;
}

/// A polarization basis: hv (linear), pm (diagonal), rl (circular).
enum class PolBasis { hv, pm, rl };

inline std::string_view to_string(PolBasis b) {
    switch (b) {
    case PolBasis::hv: return "hv";
    case PolBasis::pm: return "pm";
    case PolBasis::rl: return "rl";
    }
    return "";
}

inline bool parse_basis(std::string_view s, PolBasis &out) {
    if (s == "hv") { out = PolBasis::hv; return true; }
    if (s == "pm") { out = PolBasis::pm; return true; }
    if (s == "rl") { out = PolBasis::rl; return true; }
    return false;
}

/// The two polarizations of a basis, in (plus, minus) order.
inline std::pair<Polarization, Polarization> basis_polarizations(PolBasis b) {
    switch (b) {
    case PolBasis::hv: return {Polarization::h, Polarization::v};
    case PolBasis::pm: return {Polarization::p, Polarization::m};
    case PolBasis::rl: return {Polarization::r, Polarization::l};
    }
    return {Polarization::h, Polarization::v};
}

/**
 * A single bosonic mode: spatial path, polarization and an optional internal
 * tag. The tag models a degree of freedom no detector resolves (the
 * distinguishing label of partially distinguishable photon pairs).
 *
 * Text form is `spatial[_pol][_tag]`, e.g. `a_h`, `b_v`, `a_h_I`.
 */
struct ModeLabel {
    std::string spatial;
    Polarization pol = Polarization::none;
    std::string tag;

    ModeLabel() = default;
    ModeLabel(std::string spatial_, Polarization pol_, std::string tag_ = {})
        : spatial(std::move(spatial_)), pol(pol_), tag(std::move(tag_)) {}

    static ModeLabel parse(std::string_view text) {
        if (text.empty()) {
            throw RegistryError("empty mode label");
        }
        ModeLabel out;
        auto first = text.find('_');
        out.spatial = std::string(text.substr(0, first));
        if (out.spatial.empty()) {
            throw RegistryError("mode label '" + std::string(text) + "' has no spatial part");
        }
        if (first == std::string_view::npos) {
            return out;
        }
        auto rest = text.substr(first + 1);
        auto second = rest.find('_');
        auto head = rest.substr(0, second);
        if (parse_polarization(head, out.pol)) {
            if (second != std::string_view::npos) {
                out.tag = std::string(rest.substr(second + 1));
            }
        } else {
            out.tag = std::string(rest);
        }
        return out;
    }

    std::string name() const {
        std::string s = spatial;
        if (pol != Polarization::none) {
            s += '_';
            s += to_string(pol);
        }
        if (!tag.empty()) {
            s += '_';
            s += tag;
        }
        return s;
    }

    /// True when `other` is this mode or, for an untagged label, any tagged
    /// copy of it.
    bool covers(const ModeLabel &other) const {
        return spatial == other.spatial && pol == other.pol &&
               (tag.empty() || tag == other.tag);
    }

    ModeLabel with_tag(std::string t) const { return {spatial, pol, std::move(t)}; }
    ModeLabel base() const { return {spatial, pol, {}}; }

    friend bool operator==(const ModeLabel &, const ModeLabel &) = default;
    friend auto operator<=>(const ModeLabel &a, const ModeLabel &b) {
        return std::tie(a.spatial, a.pol, a.tag) <=> std::tie(b.spatial, b.pol, b.tag);
    }
};

/// Sorted set of unique mode labels. Every state, operator polynomial and
/// mode unitary carries one; index `i` is the i-th label in sorted order.
class ModeRegistry {
  public:
    ModeRegistry() = default;

    explicit ModeRegistry(std::vector<ModeLabel> labels) : labels_(std::move(labels)) {
        std::sort(labels_.begin(), labels_.end());
        auto dup = std::adjacent_find(labels_.begin(), labels_.end());
        if (dup != labels_.end()) {
            throw RegistryError("duplicate mode label '" + dup->name() + "'");
        }
    }

    static ModeRegistry from_names(const std::vector<std::string> &names) {
        std::vector<ModeLabel> labels;
        labels.reserve(names.size());
        for (const auto &n : names) {
            labels.push_back(ModeLabel::parse(n));
        }
        return ModeRegistry(std::move(labels));
    }

    /// The h and v modes of each listed spatial path.
    static ModeRegistry polarized(std::initializer_list<std::string_view> spatial) {
        std::vector<ModeLabel> labels;
        for (auto s : spatial) {
            labels.emplace_back(std::string(s), Polarization::h);
            labels.emplace_back(std::string(s), Polarization::v);
        }
        return ModeRegistry(std::move(labels));
    }

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    const std::vector<ModeLabel> &labels() const { return labels_; }
    const ModeLabel &operator[](std::size_t i) const { return labels_[i]; }

    bool contains(const ModeLabel &label) const {
        return std::binary_search(labels_.begin(), labels_.end(), label);
    }

    std::size_t index_of(const ModeLabel &label) const {
        auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
        if (it == labels_.end() || *it != label) {
            throw RegistryError("mode '" + label.name() + "' is not in the registry");
        }
        return static_cast<std::size_t>(it - labels_.begin());
    }

    /// Indices of every mode covered by `base` (all tagged copies when the
    /// base is untagged).
    std::vector<std::size_t> covered_by(const ModeLabel &base) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (base.covers(labels_[i])) {
                out.push_back(i);
            }
        }
        return out;
    }

    bool has_spatial(std::string_view spatial) const {
        return std::any_of(labels_.begin(), labels_.end(),
                           [&](const ModeLabel &l) { return l.spatial == spatial; });
    }

    std::vector<std::string> tags() const {
        std::vector<std::string> out;
        for (const auto &l : labels_) {
            if (std::find(out.begin(), out.end(), l.tag) == out.end()) {
                out.push_back(l.tag);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(labels_.size());
        for (const auto &l : labels_) {
            out.push_back(l.name());
        }
        return out;
    }

    friend bool operator==(const ModeRegistry &, const ModeRegistry &) = default;

  private:
    std::vector<ModeLabel> labels_;
};

inline void require_same_registry(const ModeRegistry &a, const ModeRegistry &b,
                                  std::string_view what) {
    if (a != b) {
        throw RegistryError(std::string(what) + ": registry mismatch");
    }
}

} // namespace noonsim
