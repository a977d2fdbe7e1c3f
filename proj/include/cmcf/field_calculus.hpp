#pragma once

#include "cmcf/field.hpp"
#include "cmcf/group.hpp"

namespace cmcf {

/// X_i u (or the right-frame derivative) by central coordinate differences
/// weighted with the exact coefficient polynomials at each node. Second
/// order accurate on smooth fields, exact on fields affine in the
/// coordinates. Stencil reads outside the box return u.far_field; the
/// derivative of a far-field constant is zero, so outputs carry far_field 0.
ScalarField apply_vf(const CarnotGroup& g, const ScalarField& u, Frame frame,
                     int i);

/// Symmetrised second derivative (X_i^eps X_j^eps u)^* by nested application
/// of apply_vf. Bit-for-bit symmetric in (i, j). eps scales each factor of
/// weight > 1; eps = 0 zeroes the vertical frame directions entirely.
ScalarField second_derivative(const CarnotGroup& g, const ScalarField& u,
                              int i, int j, double eps);

/// (X_1 u, ..., X_m u) over the left frame.
VectorField horizontal_gradient(const CarnotGroup& g, const ScalarField& u);

/// Full epsilon-frame gradient: entries X_i u for d(i) = 1 and eps X_i u for
/// d(i) > 1.
VectorField eps_gradient(const CarnotGroup& g, const ScalarField& u,
                         double eps);

/// Pointwise Euclidean norm of a vector field.
ScalarField magnitude(const VectorField& v);

}  // namespace cmcf
