#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>

namespace covlaw {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Matrix unit E_{s,t} (0-based).
Matrix matrix_unit(int n, int s, int t);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// ||a - a*||_max
double hermitian_defect(const Matrix& a);

/// Normalized trace tr_n = Tr / n.
Complex normalized_trace(const Matrix& a);

/// tr_n(a b) without forming the product.
Complex normalized_trace_of_product(const Matrix& a, const Matrix& b);

/// Largest |lambda| of a Hermitian matrix by Lanczos with full reorthogonalization.
/// Falls back to a dense eigensolver for small n.
double spectral_radius_hermitian(const Matrix& a, int max_krylov = 160);

/// Random Hermitian matrix with i.i.d. standard complex Gaussian entries (test data).
Matrix random_hermitian(int n, std::mt19937_64& gen);
Matrix random_matrix(int n, std::mt19937_64& gen);

/// Diagonal compression E_{D_n}.
Matrix diagonal_part(const Matrix& a);

}  // namespace covlaw
