#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noonsim/fock.hpp"
#include "noonsim/heralding.hpp"
#include "noonsim/optics.hpp"
#include "noonsim/pdc.hpp"

namespace noonsim {

/// (max - min) / (max + min); zero for an identically vanishing curve.
inline double visibility(const std::vector<double> &values) {
    if (values.empty()) {
        throw std::invalid_argument("visibility of an empty curve");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double sum = *hi + *lo;
    return sum > 0.0 ? (*hi - *lo) / sum : 0.0;
}

struct Series {
    std::string name;
    std::vector<double> values;
    double visibility = 0.0;
};

/// Curves sampled on a common abscissa (radians).
struct ScanResult {
    std::string abscissa_name;
    std::vector<double> abscissa;
    std::vector<Series> series;

    const Series &get(const std::string &name) const {
        for (const auto &s : series) {
            if (s.name == name) {
                return s;
            }
        }
        throw std::out_of_range("no series named '" + name + "'");
    }

    /// Abscissa values where `name` is within `tol` of its minimum.
    std::vector<double> minima(const std::string &name, double tol = 1e-12) const {
        const auto &v = get(name).values;
        const double lo = *std::min_element(v.begin(), v.end());
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] <= lo + tol) {
                out.push_back(abscissa[i]);
            }
        }
        return out;
    }

    std::vector<double> maxima(const std::string &name, double tol = 1e-12) const {
        const auto &v = get(name).values;
        const double hi = *std::max_element(v.begin(), v.end());
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] >= hi - tol) {
                out.push_back(abscissa[i]);
            }
        }
        return out;
    }
};

/// `points` evenly spaced values from start to stop (stop included when
/// `endpoint`).
inline std::vector<double> uniform_grid(double start, double stop, std::size_t points,
                                        bool endpoint = true) {
    if (points == 0) {
        throw std::invalid_argument("grid needs at least one point");
    }
    std::vector<double> g(points);
    const double steps = endpoint ? static_cast<double>(points - 1) : static_cast<double>(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = steps > 0 ? start + (stop - start) * static_cast<double>(i) / steps : start;
    }
    return g;
}

namespace detail {

inline void check_grid(const std::vector<double> &grid) {
    if (grid.empty()) {
        throw std::invalid_argument("scan grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("scan grid must be strictly increasing");
        }
    }
}

inline void finish(ScanResult &r) {
    for (auto &s : r.series) {
        s.visibility = visibility(s.values);
    }
}

} // namespace detail

/// The detector pair of a two-fold coincidence (threshold detectors).
struct TwofoldPair {
    std::string first = "a_h";
    std::string second = "b_v";

    std::string series_name() const { return "twofold_" + first + "_" + second; }
};

inline const DetectionPattern &fourfold_pattern() {
    static const DetectionPattern p =
        DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}, {"b_h", 1}, {"b_v", 1}});
    return p;
}

/**
 * Visibility scan: mode a is analyzed in a fixed basis while a half-wave
 * plate on mode b is rotated through `b_angles` (radians). Records the
 * a_h a_v b_h b_v four-fold and one a-b two-fold coincidence probability at
 * each angle.
 */
inline ScanResult visibility_scan(const Ensemble &source, PolBasis basis_a,
                                  const std::vector<double> &b_angles,
                                  const TwofoldPair &twofold = {}) {
    detail::check_grid(b_angles);
    const auto &reg = source.registry();
    const ModeUnitary a_analyzer = embed_polarization(analyzer(basis_a), "a", reg);
    const DetectionPattern two =
        DetectionPattern::threshold({{twofold.first, 1}, {twofold.second, 1}});
    ScanResult r{"b_hwp_angle", b_angles, {{"fourfold", {}, 0.0}, {twofold.series_name(), {}, 0.0}}};
    for (double angle : b_angles) {
        const ModeUnitary U = compose(embed_polarization(hwp(angle), "b", reg), a_analyzer);
        const Ensemble rotated = apply_unitary(U, source);
        r.series[0].values.push_back(detect_ensemble(rotated, fourfold_pattern()).probability);
        r.series[1].values.push_back(detect_ensemble(rotated, two).probability);
    }
    detail::finish(r);
    return r;
}

inline ScanResult visibility_scan(const PureState &source, PolBasis basis_a,
                                  const std::vector<double> &b_angles,
                                  const TwofoldPair &twofold = {}) {
    return visibility_scan(Ensemble::pure(source), basis_a, b_angles, twofold);
}

/// Default source of the fringe scan: the down-conversion state at tau = 0.1.
inline Ensemble default_fringe_source() {
    return Ensemble::pure(pdc_state({0.1, 4}).state);
}

/**
 * Fringe scan over a birefringent phase on mode b. Mode a is analyzed in
 * `basis_a` (the herald); mode b passes a phase plate diag(1, e^{i theta_b})
 * and a half-wave plate at 22.5 deg before its h/v detectors. Records the
 * a_h a_v b_h b_v four-fold and the two-fold coincidence probabilities.
 */
inline ScanResult fringe_scan(PolBasis basis_a, const std::vector<double> &theta_b,
                              const Ensemble &source = default_fringe_source(),
                              const TwofoldPair &twofold = {}) {
    detail::check_grid(theta_b);
    const auto &reg = source.registry();
    const ModeUnitary a_analyzer = embed_polarization(analyzer(basis_a), "a", reg);
    const ModeUnitary b_mixer = embed_polarization(hwp(deg_to_rad(22.5)), "b", reg);
    const DetectionPattern two =
        DetectionPattern::threshold({{twofold.first, 1}, {twofold.second, 1}});
    ScanResult r{"theta_b", theta_b, {{"fourfold", {}, 0.0}, {twofold.series_name(), {}, 0.0}}};
    for (double phase : theta_b) {
        const ModeUnitary U =
            compose(b_mixer, compose(embed_polarization(phase_plate(phase), "b", reg), a_analyzer));
        const Ensemble out = apply_unitary(U, source);
        r.series[0].values.push_back(detect_ensemble(out, fourfold_pattern()).probability);
        r.series[1].values.push_back(detect_ensemble(out, two).probability);
    }
    detail::finish(r);
    return r;
}

/// Grid used for visibility extraction: -90..90 deg in 0.5 deg steps, which
/// contains every bunching angle of both analyzer settings.
inline std::vector<double> default_visibility_grid() {
    return uniform_grid(deg_to_rad(-90.0), deg_to_rad(90.0), 361);
}

struct AlphaVisibility {
    double alpha;
    double visibility;
};

/// Four-fold visibility of the mixture model (a in hv, b scanned) for each alpha.
inline std::vector<AlphaVisibility> alpha_visibility_curve(const std::vector<double> &alpha_grid,
                                                           const std::vector<double> &b_grid =
                                                               default_visibility_grid()) {
    std::vector<AlphaVisibility> out;
    out.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        const Ensemble e = partially_distinguishable_two_pairs({alpha});
        const ScanResult scan = visibility_scan(e, PolBasis::hv, b_grid);
        out.push_back({alpha, scan.get("fourfold").visibility});
    }
    return out;
}

/// Raised when a visibility lies outside what the mixture model can produce.
class OutOfModelRange : public std::out_of_range {
  public:
    OutOfModelRange(double v, double lo, double hi)
        : std::out_of_range("visibility " + std::to_string(v) + " outside model range [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          low(lo), high(hi) {}

    double low;
    double high;
};

/// Inverts a monotone V(alpha) table by linear interpolation.
inline double alpha_from_visibility(double v_meas, const std::vector<AlphaVisibility> &curve) {
    if (curve.size() < 2) {
        throw std::invalid_argument("alpha_from_visibility needs at least two curve points");
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (!(curve[i].alpha > curve[i - 1].alpha) ||
            curve[i].visibility < curve[i - 1].visibility) {
            throw std::invalid_argument("visibility curve is not monotone in alpha");
        }
    }
    const double lo = curve.front().visibility, hi = curve.back().visibility;
    constexpr double slack = 1e-12;
    if (v_meas < lo - slack || v_meas > hi + slack) {
        throw OutOfModelRange(v_meas, lo, hi);
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto &p = curve[i - 1], &q = curve[i];
        if (v_meas <= q.visibility + slack) {
            if (q.visibility == p.visibility) {
                return p.alpha;
            }
            const double t = std::clamp((v_meas - p.visibility) / (q.visibility - p.visibility), 0.0, 1.0);
            return p.alpha + t * (q.alpha - p.alpha);
        }
    }
    return curve.back().alpha;
}

inline double alpha_from_visibility(double v_meas, std::size_t alpha_points = 51) {
    return alpha_from_visibility(v_meas, alpha_visibility_curve(uniform_grid(0.0, 1.0, alpha_points)));
}

struct PairRatio {
    double ratio = 0.0;                 // P(3 pairs) / P(2 pairs)
    std::map<unsigned, double> pairs;   // pair number -> probability
    double truncation_error = 0.0;
};

/// Three-to-two pair production ratio read off the photon-number
/// distribution of the truncated source state.
inline PairRatio pair_ratio_report(double tau, unsigned n_max = 4) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("pair_ratio_report: tau must be positive");
    }
    if (n_max < 3) {
        throw std::invalid_argument("pair_ratio_report: n_max must be at least 3");
    }
    const PdcState src = pdc_state({tau, n_max});
    PairRatio out;
    out.truncation_error = src.truncation_error;
    for (const auto &[photons, p] : photon_number_distribution(src.state)) {
        out.pairs[photons / 2] += p;
    }
    if (out.pairs[2] <= 0.0) {
        throw std::domain_error("pair_ratio_report: two-pair probability vanishes at this tau");
    }
    out.ratio = out.pairs[3] / out.pairs[2];
    return out;
}

/// A random polarization unitary (uniform Euler angles and global phase).
inline JonesMatrix random_polarization_unitary(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double theta = std::acos(std::sqrt(unit(rng)));
    const Amplitude a = std::polar(std::cos(theta), angle(rng));
    const Amplitude b = std::polar(std::sin(theta), angle(rng));
    const Amplitude g = std::polar(1.0, angle(rng));
    JonesMatrix u;
    u << a, b, -std::conj(b) * g, std::conj(a) * g;
    return u;
}

/// Heralding of psi_2^- behind an arbitrary analyzer on mode a, with the
/// b-mode coincidence probability of the conditional state in the analyzer
/// basis and in the two bases complementary to it.
struct AnyBasisCheck {
    JonesMatrix analyzer;
    double herald_probability = 0.0;
    double same_basis_coincidence = 0.0;
    double complementary_coincidence[2] = {0.0, 0.0};
};

inline AnyBasisCheck any_basis_herald(const JonesMatrix &W) {
    AnyBasisCheck out;
    out.analyzer = W;
    const PureState src = singlet_term(2);
    const PureState rotated = apply_unitary(embed_polarization(W, "a", src.registry()), src);
    const HeraldOutcome h = detect(rotated, DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}}));
    out.herald_probability = h.probability;
    const PureState &b = h.pure_conditional();
    const DetectionPattern coincidence = DetectionPattern::pnr({{"b_h", 1}, {"b_v", 1}});
    auto coincidence_after = [&](const JonesMatrix &V) {
        return detect(apply_unitary(embed_polarization(V, "b", b.registry()), b), coincidence)
            .probability;
    };
    // Detecting a behind W equals detecting b behind W^dagger (the singlet
    // is invariant under W on both paths), so the bases complementary to the
    // analyzer are reached by the pm and rl analyzers composed with W.
    out.same_basis_coincidence = coincidence_after(W);
    out.complementary_coincidence[0] = coincidence_after(analyzer(PolBasis::pm) * W);
    out.complementary_coincidence[1] = coincidence_after(analyzer(PolBasis::rl) * W);
    return out;
}

} // namespace noonsim
