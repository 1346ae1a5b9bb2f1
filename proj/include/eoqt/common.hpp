#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eoqt {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr Complex kI{0.0, 1.0};

// Schmidt weights and reduced-operator eigenvalues below this are treated as zero.
inline constexpr double kEpsEig = 1e-12;
// Singular values below this are always discarded.
inline constexpr double kSvdFloor = 1e-14;

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonCanonicalError : std::logic_error {
    using std::logic_error::logic_error;
};

namespace ops {

Mat identity(int d);
Mat sigma_x();
Mat sigma_y();
Mat sigma_z();
Mat ket_bra(int d, int i, int j);
Mat kron(const Mat& a, const Mat& b);

}  // namespace ops

// exp(-i H t) for Hermitian H via eigendecomposition.
Mat unitary_exp(const Mat& h, double t);
// exp(s A) for Hermitian A and real s.
Mat hermitian_exp(const Mat& a, double s);
// General dense matrix exponential.
Mat matrix_exp(const Mat& a);

// True if op^dagger op is proportional to the identity; the factor is returned in scale2.
bool is_scaled_unitary(const Mat& op, double* scale2 = nullptr, double tol = 1e-13);
bool is_hermitian(const Mat& m, double tol = 1e-12);

double binary_entropy(double p);
// -sum p log2 p over entries above kEpsEig.
double shannon_bits(const RVec& p);

}  // namespace eoqt
