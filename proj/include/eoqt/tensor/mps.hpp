#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eoqt/common.hpp"

namespace eoqt {

struct Truncation {
    int chi_max = 64;
    // Normalized singular values below max(trunc_threshold, kSvdFloor) are dropped.
    double trunc_threshold = 1e-14;
    // Optional target: also drop the smallest values while their summed weight stays below this.
    double max_discarded_weight = 0.0;
};

// Rank-3 site tensor with index order (left, phys, right).
// Storage is column-major with left fastest, then phys, then right, so the
// (left*phys) x right and left x (phys*right) groupings are both free views.
struct SiteTensor {
    int l = 1;
    int d = 1;
    int r = 1;
    Mat data;  // (l*d) x r

    SiteTensor() = default;
    SiteTensor(int left, int phys, int right);

    Complex& operator()(int a, int i, int b) { return data(a + l * i, b); }
    Complex operator()(int a, int i, int b) const { return data(a + l * i, b); }

    Eigen::Map<Mat> grouped_left() { return {data.data(), l * d, r}; }
    Eigen::Map<const Mat> grouped_left() const { return {data.data(), l * d, r}; }
    Eigen::Map<Mat> grouped_right() { return {data.data(), l, d * r}; }
    Eigen::Map<const Mat> grouped_right() const { return {data.data(), l, d * r}; }

    using Slice = Eigen::Map<Mat, 0, Eigen::OuterStride<>>;
    using ConstSlice = Eigen::Map<const Mat, 0, Eigen::OuterStride<>>;
    Slice slice(int i) { return {data.data() + l * i, l, r, Eigen::OuterStride<>(l * d)}; }
    ConstSlice slice(int i) const { return {data.data() + l * i, l, r, Eigen::OuterStride<>(l * d)}; }

    // T(a,i,b) <- sum_j op(i,j) T(a,j,b)
    void apply_physical(const Mat& op);
};

// Matrix-product state on an open chain.
//
// In canonical gauge the tensors hold B[j] = Gamma[j] lambda[j+1] (right-canonical,
// the Schmidt values of every bond are stored separately). After a non-unitary
// single-site operation the state switches to mixed gauge around an orthogonality
// center; canonicalize() restores the canonical gauge with exact Schmidt values.
// Bonds are numbered 1..n-1; bond b separates sites [0,b) from [b,n).
class MpsState {
public:
    static MpsState product_state(const std::vector<Vec>& kets, Truncation trunc = {});
    static MpsState from_state_vector(const Vec& psi, int n, int d, Truncation trunc = {});

    int size() const { return n_; }
    int local_dim() const { return d_; }
    const Truncation& truncation() const { return trunc_; }
    void set_truncation(const Truncation& t) { trunc_ = t; }

    bool is_canonical() const { return center_ < 0; }
    int center() const { return center_; }

    const SiteTensor& site(int j) const { return sites_.at(j); }
    // Schmidt values of bond b, requires canonical gauge.
    const RVec& lambda(int bond) const;
    int bond_dim(int bond) const;
    int max_bond_dim() const;
    // Gamma[j] = B[j] / lambda[j+1], divisors clamped at 1e-12.
    SiteTensor gamma(int j) const;
    double discarded_weight() const { return discarded_; }

    // Applies a d^2 x d^2 gate to sites (j, j+1), index i*d + k. Requires canonical gauge.
    // Returns the discarded weight of this step.
    double apply_two_site_gate(int j, const Mat& u);
    void apply_single_site(int j, const Mat& op, bool renormalize = true);
    // Restores canonical gauge and unit norm. Returns the discarded weight.
    double canonicalize();
    void move_center(int j);

    // These may shift the orthogonality center; the physical state is unchanged.
    Complex expectation(int j, const Mat& op);
    Mat reduced_density_matrix(int j);

    // <prod_k O_k> for operators on distinct sites. Requires canonical gauge.
    Complex expectation_product(std::vector<std::pair<int, Mat>> ops) const;
    double entanglement_entropy(int bond) const;
    double norm_squared() const;
    Vec to_dense() const;

    // Environment of the sites left of `bond`: F[a,a'] = <P_a'| O |P_a>.
    // In canonical gauge P_a carries the norm lambda_bond[a].
    Mat left_environment(int bond, int op_site = -1, const Mat* op = nullptr) const;
    // Environment of the sites right of `bond`: E[b,b'] = <Q_b'| O |Q_b>.
    Mat right_environment(int bond, int op_site = -1, const Mat* op = nullptr) const;

    void write_checkpoint(const std::string& path) const;
    static MpsState read_checkpoint(const std::string& path);

private:
    MpsState(int n, int d, Truncation trunc);
    int keep_count(const RVec& s, double* discarded) const;
    void enter_center_mode();

    int n_ = 0;
    int d_ = 0;
    Truncation trunc_;
    std::vector<SiteTensor> sites_;
    std::vector<RVec> lambdas_;  // n+1 entries; 0 and n are the trivial boundaries
    int center_ = -1;
    double discarded_ = 0.0;
};

struct SchmidtBlocks {
    RVec weights;             // Schmidt weights at the cut, descending
    std::vector<Mat> blocks;  // <k| tr_side(O phi) |l> in the Schmidt basis of the other side
    bool op_right = true;     // operator site lies in [cut, n)
};

// Reduced operators tr_B(O phi) (or tr_A for sites left of the cut) expressed in the
// Schmidt basis of the complementary side.
SchmidtBlocks schmidt_operator_blocks(MpsState& state, int cut, int site, const std::vector<Mat>& ops);
Mat schmidt_operator_block(MpsState& state, int cut, int site, const Mat& op);

}  // namespace eoqt
