#pragma once

#include <Eigen/Dense>

#include "noonsim/mode.hpp"

namespace noonsim {

/// Unitary acting on the single-photon space spanned by a registry's modes.
/// Column i is the image of mode i: a_i^dagger -> sum_j U(j, i) a_j^dagger.
struct ModeUnitary {
    ModeRegistry registry;
    Eigen::MatrixXcd matrix;

    static ModeUnitary identity(ModeRegistry reg) {
        const auto n = static_cast<Eigen::Index>(reg.size());
        return {std::move(reg), Eigen::MatrixXcd::Identity(n, n)};
    }

    std::size_t dim() const { return registry.size(); }

    ModeUnitary adjoint() const { return {registry, matrix.adjoint()}; }

    /// Largest elementwise deviation of U U^dagger from the identity.
    double unitarity_error() const {
        const auto n = matrix.rows();
        return (matrix * matrix.adjoint() - Eigen::MatrixXcd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    }

    bool is_unitary(double tol = 1e-12) const { return unitarity_error() <= tol; }
};

/// `outer` after `inner`: the matrix product outer * inner.
inline ModeUnitary compose(const ModeUnitary &outer, const ModeUnitary &inner) {
    require_same_registry(outer.registry, inner.registry, "compose");
    return {outer.registry, outer.matrix * inner.matrix};
}

} // namespace noonsim
