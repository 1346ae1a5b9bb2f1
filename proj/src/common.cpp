#include "eoqt/common.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace eoqt {

namespace ops {

Mat identity(int d) { return Mat::Identity(d, d); }

Mat sigma_x() {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

Mat sigma_y() {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = -kI;
    m(1, 0) = kI;
    return m;
}

Mat sigma_z() {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

Mat ket_bra(int d, int i, int j) {
    Mat m = Mat::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace ops

Mat unitary_exp(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec phases = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat hermitian_exp(const Mat& a, double s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Vec f = (es.eigenvalues() * s).array().exp().cast<Complex>();
    return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
}

Mat matrix_exp(const Mat& a) { return a.exp(); }

bool is_scaled_unitary(const Mat& op, double* scale2, double tol) {
    if (op.rows() != op.cols()) return false;
    Mat g = op.adjoint() * op;
    double s = g.diagonal().real().mean();
    if (scale2) *scale2 = s;
    if (s <= 0.0) return false;
    return (g - s * Mat::Identity(op.rows(), op.cols())).cwiseAbs().maxCoeff() <= tol * s;
}

bool is_hermitian(const Mat& m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

double shannon_bits(const RVec& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > kEpsEig) s -= p[i] * std::log2(p[i]);
    return s;
}

}  // namespace eoqt
