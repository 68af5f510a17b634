#include "covlaw/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace covlaw {

Matrix matrix_unit(int n, int s, int t) {
    Matrix e = Matrix::Zero(n, n);
    e(s, t) = 1.0;
    return e;
}

double operator_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

double hermitian_defect(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

Complex normalized_trace(const Matrix& a) {
    return a.trace() / static_cast<double>(a.rows());
}

Complex normalized_trace_of_product(const Matrix& a, const Matrix& b) {
    // Tr(AB) = sum_{s,t} A_{st} B_{ts}
    return (a.cwiseProduct(b.transpose())).sum() / static_cast<double>(a.rows());
}

double spectral_radius_hermitian(const Matrix& a, int max_krylov) {
    const Eigen::Index n = a.rows();
    if (n == 0) return 0.0;
    if (n <= 2 * max_krylov) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    // Deterministic start vector so results are reproducible.
    Vector q(n);
    for (Eigen::Index s = 0; s < n; ++s) q(s) = Complex(1.0 + 0.5 * std::sin(0.7 * s), 0.3 * std::cos(1.3 * s));
    q.normalize();
    const int k = static_cast<int>(std::min<Eigen::Index>(max_krylov, n));
    Matrix basis(n, k);
    std::vector<double> alpha, beta;
    Vector w;
    for (int j = 0; j < k; ++j) {
        basis.col(j) = q;
        w = a * q;
        const double aj = (q.adjoint() * w)(0).real();
        alpha.push_back(aj);
        // Full reorthogonalization (twice is enough).
        for (int pass = 0; pass < 2; ++pass) {
            const Vector coeffs = basis.leftCols(j + 1).adjoint() * w;
            w -= basis.leftCols(j + 1) * coeffs;
        }
        const double bj = w.norm();
        if (bj < 1e-12 || j + 1 == k) break;
        beta.push_back(bj);
        q = w / bj;
    }
    const int m = static_cast<int>(alpha.size());
    RealMatrix tri = RealMatrix::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        tri(j, j) = alpha[j];
        if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(tri, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix random_matrix(int n, std::mt19937_64& gen) {
    std::normal_distribution<double> g;
    Matrix a(n, n);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) a(s, t) = Complex(g(gen), g(gen));
    return a;
}

Matrix random_hermitian(int n, std::mt19937_64& gen) {
    const Matrix a = random_matrix(n, gen);
    return (a + a.adjoint()) / 2.0;
}

Matrix diagonal_part(const Matrix& a) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    d.diagonal() = a.diagonal();
    return d;
}

}  // namespace covlaw
