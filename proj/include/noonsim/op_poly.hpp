#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noonsim/fock.hpp"
#include "noonsim/unitary.hpp"

namespace noonsim {

/// Power of each annihilation operator in a monomial, in registry order.
using ExponentVector = std::vector<unsigned>;

/// Coefficients with magnitude below this are dropped from polynomials.
inline constexpr double kCoefficientPrune = 1e-12;

/// Default absolute tolerance for polynomial comparisons.
inline constexpr double kPolyCompareTolerance = 1e-10;

struct OpMonomial {
    Amplitude coefficient;
    ExponentVector exponents;
};

/**
 * Complex polynomial in commuting annihilation operators over a registry.
 *
 * Monomials are stored in lexicographic exponent order with no duplicates
 * and no (pruned) zero coefficients, so two polynomials built in different
 * ways compare term by term.
 */
class OpPolynomial {
  public:
    using CoeffMap = std::map<ExponentVector, Amplitude>;

    OpPolynomial() = default;
    explicit OpPolynomial(ModeRegistry registry) : registry_(std::move(registry)) {}

    static OpPolynomial constant(ModeRegistry registry, Amplitude c) {
        OpPolynomial p(std::move(registry));
        p.add(ExponentVector(p.registry_.size(), 0), c);
        return p;
    }

    /// The single operator c * a_mode.
    static OpPolynomial mode(ModeRegistry registry, const ModeLabel &label, Amplitude c = 1.0) {
        OpPolynomial p(std::move(registry));
        ExponentVector e(p.registry_.size(), 0);
        e[p.registry_.index_of(label)] = 1;
        p.add(e, c);
        return p;
    }

    /// sum_k c_k a_{mode_k}
    static OpPolynomial linear(ModeRegistry registry,
                               const std::vector<std::pair<ModeLabel, Amplitude>> &terms) {
        OpPolynomial p(std::move(registry));
        for (const auto &[label, c] : terms) {
            ExponentVector e(p.registry_.size(), 0);
            e[p.registry_.index_of(label)] = 1;
            p.add(e, c);
        }
        return p;
    }

    /// Product of single annihilation operators, e.g. a_h a_v.
    static OpPolynomial product_of(ModeRegistry registry, const std::vector<ModeLabel> &labels) {
        OpPolynomial p(std::move(registry));
        ExponentVector e(p.registry_.size(), 0);
        for (const auto &l : labels) {
            e[p.registry_.index_of(l)] += 1;
        }
        p.add(e, 1.0);
        return p;
    }

    void add(const ExponentVector &e, Amplitude c) {
        if (e.size() != registry_.size()) {
            throw RegistryError("exponent vector length does not match registry size");
        }
        auto [it, inserted] = coeffs_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
        }
        if (std::abs(it->second) < kCoefficientPrune) {
            coeffs_.erase(it);
        }
    }

    const ModeRegistry &registry() const { return registry_; }
    const CoeffMap &coefficients() const { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    bool is_zero() const { return coeffs_.empty(); }

    Amplitude coefficient(const ExponentVector &e) const {
        auto it = coeffs_.find(e);
        return it == coeffs_.end() ? Amplitude{} : it->second;
    }

    std::vector<OpMonomial> monomials() const {
        std::vector<OpMonomial> out;
        out.reserve(coeffs_.size());
        for (const auto &[e, c] : coeffs_) {
            out.push_back({c, e});
        }
        return out;
    }

    /// Highest total degree among the monomials (0 for the zero polynomial).
    unsigned degree() const {
        unsigned d = 0;
        for (const auto &[e, c] : coeffs_) {
            d = std::max(d, total_photons(e));
        }
        return d;
    }

    OpPolynomial scaled(Amplitude factor) const {
        OpPolynomial out(registry_);
        for (const auto &[e, c] : coeffs_) {
            out.add(e, c * factor);
        }
        return out;
    }

    /// Human-readable form such as "a_h^2 - a_v^2".
    std::string to_string() const;

  private:
    ModeRegistry registry_;
    CoeffMap coeffs_;
};

inline OpPolynomial poly_add(const OpPolynomial &p1, const OpPolynomial &p2) {
    require_same_registry(p1.registry(), p2.registry(), "poly_add");
    OpPolynomial out = p1;
    for (const auto &[e, c] : p2.coefficients()) {
        out.add(e, c);
    }
    return out;
}

inline OpPolynomial poly_multiply(const OpPolynomial &p1, const OpPolynomial &p2) {
    require_same_registry(p1.registry(), p2.registry(), "poly_multiply");
    OpPolynomial out(p1.registry());
    for (const auto &[e1, c1] : p1.coefficients()) {
        for (const auto &[e2, c2] : p2.coefficients()) {
            ExponentVector e(e1.size());
            for (std::size_t i = 0; i < e.size(); ++i) {
                e[i] = e1[i] + e2[i];
            }
            out.add(e, c1 * c2);
        }
    }
    return out;
}

inline OpPolynomial poly_power(const OpPolynomial &p, unsigned k) {
    OpPolynomial out = OpPolynomial::constant(p.registry(), 1.0);
    for (unsigned i = 0; i < k; ++i) {
        out = poly_multiply(out, p);
    }
    return out;
}

/// Applies the operator polynomial to a state. Each monomial acts as the
/// product of its annihilation operators; the result is not renormalized.
inline PureState poly_apply(const OpPolynomial &p, const PureState &s) {
    require_same_registry(p.registry(), s.registry(), "poly_apply");
    PureState out(s.registry());
    for (const auto &[e, c] : p.coefficients()) {
        for (const auto &[occ, amp] : s.terms()) {
            double factor = 1.0;
            OccupationVector next = occ;
            bool vanishes = false;
            for (std::size_t i = 0; i < e.size() && !vanishes; ++i) {
                for (unsigned k = 0; k < e[i]; ++k) {
                    if (next[i] == 0) {
                        vanishes = true;
                        break;
                    }
                    factor *= std::sqrt(static_cast<double>(next[i]));
                    next[i] -= 1;
                }
            }
            if (!vanishes) {
                out.add(next, c * amp * factor);
            }
        }
    }
    return out;
}

/// Replaces every annihilation operator a_i of `p` by `images[i]`, a
/// polynomial over `target`.
inline OpPolynomial substitute(const OpPolynomial &p, const ModeRegistry &target,
                               const std::vector<OpPolynomial> &images) {
    if (images.size() != p.registry().size()) {
        throw RegistryError("substitute: one image per mode required");
    }
    for (const auto &img : images) {
        require_same_registry(img.registry(), target, "substitute");
    }
    // Powers are reused heavily across monomials.
    std::vector<std::vector<OpPolynomial>> powers(images.size());
    auto power_of = [&](std::size_t i, unsigned k) -> const OpPolynomial & {
        auto &cache = powers[i];
        if (cache.empty()) {
            cache.push_back(OpPolynomial::constant(target, 1.0));
        }
        while (cache.size() <= k) {
            cache.push_back(poly_multiply(cache.back(), images[i]));
        }
        return cache[k];
    };
    OpPolynomial out(target);
    for (const auto &[e, c] : p.coefficients()) {
        OpPolynomial term = OpPolynomial::constant(target, c);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] > 0) {
                term = poly_multiply(term, power_of(i, e[i]));
            }
        }
        out = poly_add(out, term);
    }
    return out;
}

/**
 * Conjugates `p` by the Fock-space lift of `U`, so that for every state s
 *
 *     poly_apply(poly_transform(p, U), apply_unitary(U, s))
 *         == apply_unitary(U, poly_apply(p, s)).
 *
 * With a_i^dagger -> sum_j U(j,i) a_j^dagger this substitutes
 * a_i -> sum_j conj(U(j,i)) a_j.
 */
inline OpPolynomial poly_transform(const OpPolynomial &p, const ModeUnitary &U) {
    require_same_registry(p.registry(), U.registry, "poly_transform");
    const auto n = p.registry().size();
    if (static_cast<std::size_t>(U.matrix.rows()) != n ||
        static_cast<std::size_t>(U.matrix.cols()) != n) {
        throw RegistryError("poly_transform: unitary dimension does not match registry");
    }
    std::vector<OpPolynomial> images;
    images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        OpPolynomial img(p.registry());
        for (std::size_t j = 0; j < n; ++j) {
            ExponentVector e(n, 0);
            e[j] = 1;
            img.add(e, std::conj(U.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))));
        }
        images.push_back(std::move(img));
    }
    return substitute(p, p.registry(), images);
}

/// The operator on the input side of `U` that is equivalent to detecting
/// `p` on its output side: U^dagger p U.
inline OpPolynomial back_propagate(const OpPolynomial &p, const ModeUnitary &U) {
    return poly_transform(p, U.adjoint());
}

/// Keeps only the monomials built exclusively from modes covered by `modes`.
/// Used to drop operators of input ports known to hold vacuum.
inline OpPolynomial restrict_to(const OpPolynomial &p, const std::vector<ModeLabel> &modes) {
    std::vector<bool> allowed(p.registry().size(), false);
    for (const auto &m : modes) {
        for (auto i : p.registry().covered_by(m)) {
            allowed[i] = true;
        }
    }
    OpPolynomial out(p.registry());
    for (const auto &[e, c] : p.coefficients()) {
        bool ok = true;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] > 0 && !allowed[i]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.add(e, c);
        }
    }
    return out;
}

/// Every coefficient of p and q agrees within `tol`.
inline bool approx_equal(const OpPolynomial &p, const OpPolynomial &q,
                         double tol = kPolyCompareTolerance) {
    require_same_registry(p.registry(), q.registry(), "approx_equal");
    OpPolynomial diff = poly_add(p, q.scaled(-1.0));
    for (const auto &[e, c] : diff.coefficients()) {
        if (std::abs(c) > tol) {
            return false;
        }
    }
    return true;
}

/// p == e^{i phi} q for some real phi, coefficientwise within `tol`.
inline bool equal_up_to_global_phase(const OpPolynomial &p, const OpPolynomial &q,
                                     double tol = kPolyCompareTolerance) {
    require_same_registry(p.registry(), q.registry(), "equal_up_to_global_phase");
    Amplitude overlap{};
    for (const auto &[e, c] : q.coefficients()) {
        overlap += std::conj(c) * p.coefficient(e);
    }
    const Amplitude phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Amplitude{1.0};
    return approx_equal(p, q.scaled(phase), tol);
}

/// If p == lambda * q for some complex lambda (coefficientwise within `tol`),
/// returns lambda.
inline std::optional<Amplitude> proportionality(const OpPolynomial &p, const OpPolynomial &q,
                                                double tol = kPolyCompareTolerance) {
    require_same_registry(p.registry(), q.registry(), "proportionality");
    if (q.is_zero()) {
        return std::nullopt;
    }
    Amplitude num{};
    double den = 0.0;
    for (const auto &[e, c] : q.coefficients()) {
        num += std::conj(c) * p.coefficient(e);
        den += std::norm(c);
    }
    const Amplitude lambda = num / den;
    if (!approx_equal(p, q.scaled(lambda), tol)) {
        return std::nullopt;
    }
    return lambda;
}

/// The two annihilation operators p_+ and p_- defining a polarization axis.
struct PolarizationAxis {
    ModeLabel plus;
    ModeLabel minus;

    static PolarizationAxis of(const std::string &spatial, PolBasis basis) {
        auto [p, m] = basis_polarizations(basis);
        return {ModeLabel{spatial, p}, ModeLabel{spatial, m}};
    }
};

/**
 * Product of n linear operators q_m = p_+ + e^{i(2 pi m + theta)/n} p_-,
 * m = 0..n-1: photons placed equidistantly on the great circle orthogonal to
 * the axis. Expands to p_+^n - e^{i(n pi + theta)} p_-^n.
 */
inline OpPolynomial bunching_product(unsigned n, double theta, const PolarizationAxis &axis) {
    if (n == 0) {
        throw std::invalid_argument("bunching_product: n must be at least 1");
    }
    ModeRegistry reg({axis.plus, axis.minus});
    OpPolynomial out = OpPolynomial::constant(reg, 1.0);
    for (unsigned m = 0; m < n; ++m) {
        const double phase = (2.0 * std::numbers::pi * m + theta) / n;
        OpPolynomial q = OpPolynomial::linear(
            reg, {{axis.plus, 1.0}, {axis.minus, std::polar(1.0, phase)}});
        out = poly_multiply(out, q);
    }
    return out;
}

namespace detail {

inline std::string format_real(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

} // namespace detail

inline std::string OpPolynomial::to_string() const {
    if (coeffs_.empty()) {
        return "0";
    }
    std::string out;
    bool first = true;
    // Highest-degree-first reads more naturally: a_h^2 before a_v^2.
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        const auto &[e, c] = *it;
        std::string ops;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) {
                continue;
            }
            if (!ops.empty()) {
                ops += ' ';
            }
            ops += registry_[i].name();
            if (e[i] > 1) {
                ops += '^' + std::to_string(e[i]);
            }
        }
        const bool is_real = std::abs(c.imag()) < kCoefficientPrune;
        std::string coef;
        bool negative = false;
        if (is_real) {
            negative = c.real() < 0;
            const double mag = std::abs(c.real());
            if (std::abs(mag - 1.0) > 1e-12 || ops.empty()) {
                coef = detail::format_real(mag);
            }
        } else if (std::abs(c.real()) < kCoefficientPrune) {
            negative = c.imag() < 0;
            const double mag = std::abs(c.imag());
            coef = (std::abs(mag - 1.0) > 1e-12 ? detail::format_real(mag) : std::string()) + "i";
        } else {
            coef = "(" + detail::format_real(c.real()) + (c.imag() < 0 ? "-" : "+") +
                   detail::format_real(std::abs(c.imag())) + "i)";
        }
        if (first) {
            out += negative ? "-" : "";
        } else {
            out += negative ? " - " : " + ";
        }
        first = false;
        out += coef;
        if (!coef.empty() && !ops.empty()) {
            out += ' ';
        }
        out += ops;
    }
    return out;
}

} // namespace noonsim
