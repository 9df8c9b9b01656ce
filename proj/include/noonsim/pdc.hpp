#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "noonsim/fock.hpp"

namespace noonsim {

/// Interaction strength and pair-number cutoff of a stimulated down-conversion source.
struct PdcParams {
    double tau = 0.1;
    unsigned n_max = 4;
};

/// Truncated source state and the probability mass left out beyond n_max.
struct PdcState {
    PureState state;
    double truncation_error = 0.0;
};

/// Fraction of pairs carrying the indistinguishable two-pair component.
struct DistinguishabilityModel {
    double alpha = 1.0;
};

/// The a_h, a_v, b_h, b_v modes, optionally tagged.
inline ModeRegistry source_registry(const std::string &tag = {}) {
    return ModeRegistry({{"a", Polarization::h, tag},
                         {"a", Polarization::v, tag},
                         {"b", Polarization::h, tag},
                         {"b", Polarization::v, tag}});
}

/**
 * The n-pair polarization singlet
 *
 *     1/sqrt(n+1) sum_{m=0}^{n} (-1)^m |n-m, m>_a |m, n-m>_b
 *
 * with |x, y>_i holding x horizontal and y vertical photons in path i.
 */
inline PureState singlet_term(unsigned n, const std::string &tag = {}) {
    const ModeRegistry reg = source_registry(tag);
    // Registry order is a_h, a_v, b_h, b_v.
    PureState s(reg);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n) + 1.0);
    for (unsigned m = 0; m <= n; ++m) {
        s.add({n - m, m, m, n - m}, (m % 2 == 0) ? amp : -amp);
    }
    return s;
}

/// Weight of the n-pair block in the source: (n+1) tanh^{2n} tau / cosh^4 tau.
inline double pair_probability(double tau, unsigned n) {
    const double t = std::tanh(tau), c = std::cosh(tau);
    return (n + 1.0) * std::pow(t, 2.0 * n) / std::pow(c, 4.0);
}

/**
 * Down-conversion output truncated at n_max pairs:
 *
 *     1/cosh^2(tau) sum_n sqrt(n+1) tanh^n(tau) |psi_n^->
 *
 * Not renormalized; the missing norm is reported as truncation_error.
 */
inline PdcState pdc_state(const PdcParams &p) {
    if (!(p.tau >= 0.0)) {
        throw std::invalid_argument("pdc_state: tau must be nonnegative");
    }
    PureState s(source_registry());
    const double prefactor = 1.0 / std::pow(std::cosh(p.tau), 2.0);
    const double t = std::tanh(p.tau);
    for (unsigned n = 0; n <= p.n_max; ++n) {
        const double block = prefactor * std::sqrt(n + 1.0) * std::pow(t, static_cast<double>(n));
        const PureState term = singlet_term(n);
        for (const auto &[occ, amp] : term.terms()) {
            s.add(occ, amp * block);
        }
    }
    const double err = std::max(0.0, 1.0 - s.norm_squared());
    return {std::move(s), err};
}

/**
 * Two photon pairs that are indistinguishable with probability alpha.
 *
 * Photons carry an internal label realized as tagged copies of every mode
 * (a_h_I, a_h_II, ...). The indistinguishable branch is psi_2^- on the I
 * modes; the distinguishable branch is psi_1^- on the I modes times psi_1^-
 * on the II modes. Because no detector resolves the label, the two branches
 * never interfere and form a mixture with weights alpha and 1 - alpha.
 */
inline Ensemble partially_distinguishable_two_pairs(const DistinguishabilityModel &model) {
    if (!(model.alpha >= 0.0 && model.alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    const PureState indist = tensor(singlet_term(2, "I"), PureState::vacuum(source_registry("II")));
    const PureState dist = tensor(singlet_term(1, "I"), singlet_term(1, "II"));
    return Ensemble({{model.alpha, indist}, {1.0 - model.alpha, dist}});
}

} // namespace noonsim
