#include "eoqt/dense/dense_state.hpp"

#include <algorithm>
#include <cmath>

namespace eoqt::dense {

namespace {

Eigen::Index ipow(int d, int k) {
    Eigen::Index r = 1;
    for (int i = 0; i < k; ++i) r *= d;
    return r;
}

}  // namespace

DenseState::DenseState(Vec psi, int n, int d) : psi_(std::move(psi)), n_(n), d_(d) {
    if (n < 1 || d < 2) throw std::invalid_argument("dense state needs n >= 1 and d >= 2");
    if (psi_.size() != ipow(d, n)) throw std::invalid_argument("dense state length is not d^n");
    const double nrm = psi_.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("dense state is zero");
    psi_ /= nrm;
}

DenseState DenseState::product(const std::vector<Vec>& kets) {
    Vec psi = Vec::Ones(1);
    for (const Vec& k : kets) {
        Vec next(psi.size() * k.size());
        for (Eigen::Index a = 0; a < psi.size(); ++a) next.segment(a * k.size(), k.size()) = psi[a] * k;
        psi = std::move(next);
    }
    return DenseState(psi, static_cast<int>(kets.size()), static_cast<int>(kets.front().size()));
}

Complex DenseState::expectation(int j, const Mat& op) const {
    DenseState tmp = *this;
    tmp.apply_single_site(j, op, false);
    return psi_.dot(tmp.psi_);
}

void DenseState::apply_single_site(int j, const Mat& op, bool renormalize) {
    if (j < 0 || j >= n_) throw std::out_of_range("site outside chain");
    const Eigen::Index post = ipow(d_, n_ - 1 - j);
    const Eigen::Index pre = ipow(d_, j);
    Vec out = Vec::Zero(psi_.size());
    for (Eigen::Index p = 0; p < pre; ++p)
        for (int i = 0; i < d_; ++i)
            for (int k = 0; k < d_; ++k) {
                const Complex o = op(i, k);
                if (o == Complex(0.0)) continue;
                out.segment((p * d_ + i) * post, post) += o * psi_.segment((p * d_ + k) * post, post);
            }
    psi_ = std::move(out);
    if (renormalize) {
        const double nrm = psi_.norm();
        if (!(nrm > 0.0)) throw NumericalError("operator annihilated the state");
        psi_ /= nrm;
    }
}

void DenseState::apply_two_site(int j, const Mat& u) {
    if (j < 0 || j + 1 >= n_) throw std::out_of_range("bond outside chain");
    const Eigen::Index post = ipow(d_, n_ - 2 - j);
    const Eigen::Index pre = ipow(d_, j);
    const int dd = d_ * d_;
    Vec out = Vec::Zero(psi_.size());
    for (Eigen::Index p = 0; p < pre; ++p)
        for (int a = 0; a < dd; ++a)
            for (int b = 0; b < dd; ++b) {
                const Complex o = u(a, b);
                if (o == Complex(0.0)) continue;
                out.segment((p * dd + a) * post, post) += o * psi_.segment((p * dd + b) * post, post);
            }
    psi_ = std::move(out);
}

Mat DenseState::coefficient_matrix(int cut) const {
    if (cut < 1 || cut >= n_) throw std::out_of_range("cut outside chain");
    const Eigen::Index rows = ipow(d_, cut);
    const Eigen::Index cols = ipow(d_, n_ - cut);
    Mat m(rows, cols);
    for (Eigen::Index p = 0; p < rows; ++p) m.row(p) = psi_.segment(p * cols, cols).transpose();
    return m;
}

double DenseState::entanglement_entropy(int cut) const {
    Eigen::JacobiSVD<Mat> svd(coefficient_matrix(cut));
    return shannon_bits(svd.singularValues().array().square().matrix());
}

DenseSchmidt dense_schmidt_blocks(const DenseState& s, int cut, int site, const std::vector<Mat>& ops) {
    const int n = s.size(), d = s.local_dim();
    Mat m = s.coefficient_matrix(cut);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    DenseSchmidt out;
    const Eigen::Index k = std::min(m.rows(), m.cols());
    out.weights = svd.singularValues().head(k).array().square();
    for (const Mat& op : ops) {
        if (site >= cut) {
            const Mat ob = embed(op, site - cut, n - cut, d);
            const Mat x = (m * ob.transpose()) * m.adjoint();  // tr_B(O phi) on A
            const Mat u = svd.matrixU().leftCols(k);
            out.blocks.push_back(u.adjoint() * x * u);
        } else {
            const Mat oa = embed(op, site, cut, d);
            const Mat y = (oa * m).transpose() * m.conjugate();  // tr_A(O phi) on B
            const Mat v = svd.matrixV().leftCols(k);
            out.blocks.push_back(v.transpose() * y * v.conjugate());
        }
    }
    return out;
}

Mat embed(const Mat& op, int site, int n, int d) {
    Mat out = Mat::Identity(1, 1);
    for (int j = 0; j < n; ++j) out = ops::kron(out, j == site ? op : Mat(Mat::Identity(d, d)));
    return out;
}

Mat embed_two(const Mat& a, int i, const Mat& b, int j, int n, int d) {
    Mat out = Mat::Identity(1, 1);
    for (int k = 0; k < n; ++k) out = ops::kron(out, k == i ? a : (k == j ? b : Mat(Mat::Identity(d, d))));
    return out;
}

Mat partial_trace_keep(const Mat& rho, const std::vector<int>& keep, int n, int d) {
    std::vector<int> kept = keep;
    std::sort(kept.begin(), kept.end());
    std::vector<int> traced;
    for (int j = 0; j < n; ++j)
        if (!std::binary_search(kept.begin(), kept.end(), j)) traced.push_back(j);
    const Eigen::Index dk = ipow(d, static_cast<int>(kept.size()));
    const Eigen::Index dt = ipow(d, static_cast<int>(traced.size()));
    auto compose = [&](Eigen::Index ki, Eigen::Index ti) {
        // Scatter kept/traced digits back into a full basis index.
        std::vector<int> digits(n);
        for (int m = static_cast<int>(kept.size()) - 1; m >= 0; --m) { digits[kept[m]] = static_cast<int>(ki % d); ki /= d; }
        for (int m = static_cast<int>(traced.size()) - 1; m >= 0; --m) { digits[traced[m]] = static_cast<int>(ti % d); ti /= d; }
        Eigen::Index idx = 0;
        for (int j = 0; j < n; ++j) idx = idx * d + digits[j];
        return idx;
    };
    Mat out = Mat::Zero(dk, dk);
    for (Eigen::Index a = 0; a < dk; ++a)
        for (Eigen::Index b = 0; b < dk; ++b) {
            Complex acc = 0.0;
            for (Eigen::Index t = 0; t < dt; ++t) acc += rho(compose(a, t), compose(b, t));
            out(a, b) = acc;
        }
    return out;
}

Complex expectation(const Mat& rho, const Mat& op, int site, int n, int d) {
    return (partial_trace_keep(rho, {site}, n, d) * op).trace();
}

}  // namespace eoqt::dense
