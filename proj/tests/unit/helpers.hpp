#pragma once

#include <random>

#include "eoqt/common.hpp"

namespace testutil {

inline eoqt::Vec random_vector(std::mt19937_64& g, int dim) {
    std::normal_distribution<double> nd;
    eoqt::Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = {nd(g), nd(g)};
    return v.normalized();
}

inline eoqt::Mat random_matrix(std::mt19937_64& g, int r, int c) {
    std::normal_distribution<double> nd;
    eoqt::Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = {nd(g), nd(g)};
    return m;
}

inline eoqt::Mat random_hermitian(std::mt19937_64& g, int d) {
    const eoqt::Mat a = random_matrix(g, d, d);
    return (a + a.adjoint()) / 2.0;
}

inline eoqt::Mat random_unitary(std::mt19937_64& g, int d) {
    return eoqt::unitary_exp(random_hermitian(g, d), 1.0);
}

// Norm distance after removing the relative global phase.
inline double state_distance(const eoqt::Vec& a, const eoqt::Vec& b) {
    const eoqt::Vec x = a.normalized(), y = b.normalized();
    const eoqt::Complex ov = x.dot(y);
    const eoqt::Complex ph = std::abs(ov) > 0.0 ? ov / std::abs(ov) : eoqt::Complex(1.0);
    return (x * ph - y).norm();
}

}  // namespace testutil
