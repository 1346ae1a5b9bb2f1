#pragma once

#include <vector>

#include "eoqt/common.hpp"

namespace eoqt::dense {

// Full state vector; site 0 is the most significant digit of the basis index.
class DenseState {
public:
    DenseState(Vec psi, int n, int d);
    static DenseState product(const std::vector<Vec>& kets);

    int size() const { return n_; }
    int local_dim() const { return d_; }
    const Vec& vector() const { return psi_; }

    Complex expectation(int j, const Mat& op) const;
    void apply_single_site(int j, const Mat& op, bool renormalize = true);
    // u acts on (j, j+1) with index i*d + k.
    void apply_two_site(int j, const Mat& u);

    // Coefficient matrix across bond `cut`: rows index sites [0,cut), columns [cut,n).
    Mat coefficient_matrix(int cut) const;
    double entanglement_entropy(int cut) const;

private:
    Vec psi_;
    int n_;
    int d_;
};

struct DenseSchmidt {
    RVec weights;
    std::vector<Mat> blocks;
};

// Brute-force reference for schmidt_operator_blocks: full reduced operators
// projected on the complementary Schmidt vectors from an SVD.
DenseSchmidt dense_schmidt_blocks(const DenseState& s, int cut, int site, const std::vector<Mat>& ops);

// I x ... x op (at site) x ... x I
Mat embed(const Mat& op, int site, int n, int d);
Mat embed_two(const Mat& a, int i, const Mat& b, int j, int n, int d);
Mat partial_trace_keep(const Mat& rho, const std::vector<int>& keep, int n, int d);
Complex expectation(const Mat& rho, const Mat& op, int site, int n, int d);

}  // namespace eoqt::dense
