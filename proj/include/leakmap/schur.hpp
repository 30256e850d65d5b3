#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace leakmap {

/// A = V T V^H with V unitary and T upper triangular.
struct SchurFactorization {
  Eigen::MatrixXcd T;
  Eigen::MatrixXcd V;
};

/// Complex Schur factorisation (LAPACK zgees). Throws NumericalError on
/// non-finite input or non-convergence, with matrix diagnostics.
SchurFactorization complex_schur(const Eigen::MatrixXcd& a);

/// Exchanges the adjacent diagonal entries k and k+1 of T by a Givens
/// rotation, updating V so that V T V^H is unchanged.
void swap_adjacent(SchurFactorization& f, Eigen::Index k);

/// Reorders the factorisation so that |T_00| >= |T_11| >= ... by repeated
/// adjacent swaps. Entries of equal modulus keep their relative order.
void sort_by_modulus(SchurFactorization& f);

/// max |A - V T V^H|
double factorization_residual(const Eigen::MatrixXcd& a, const SchurFactorization& f);

/// max |V^H V - I|
double orthonormality_error(const Eigen::MatrixXcd& v);

}  // namespace leakmap
