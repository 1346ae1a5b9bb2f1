#include "eoqt/tensor/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace eoqt {

namespace {

using Svd = Eigen::BDCSVD<Mat>;

void require_site(int j, int n) {
    if (j < 0 || j >= n) throw std::out_of_range("site index " + std::to_string(j) + " outside chain");
}

// F' = sum_i (T_i^O)^T F conj(T_i)
Mat transfer_left(const Mat& f, const SiteTensor& t, const Mat* op) {
    Mat out = Mat::Zero(t.r, t.r);
    if (op) {
        SiteTensor to = t;
        to.apply_physical(*op);
        for (int i = 0; i < t.d; ++i) out.noalias() += to.slice(i).transpose() * (f * t.slice(i).conjugate());
    } else {
        for (int i = 0; i < t.d; ++i) out.noalias() += t.slice(i).transpose() * (f * t.slice(i).conjugate());
    }
    return out;
}

// E' = sum_i T_i^O E T_i^dagger
Mat transfer_right(const Mat& e, const SiteTensor& t, const Mat* op) {
    Mat out = Mat::Zero(t.l, t.l);
    if (op) {
        SiteTensor to = t;
        to.apply_physical(*op);
        for (int i = 0; i < t.d; ++i) out.noalias() += (to.slice(i) * e) * t.slice(i).adjoint();
    } else {
        for (int i = 0; i < t.d; ++i) out.noalias() += (t.slice(i) * e) * t.slice(i).adjoint();
    }
    return out;
}

}  // namespace

SiteTensor::SiteTensor(int left, int phys, int right) : l(left), d(phys), r(right), data(Mat::Zero(left * phys, right)) {}

void SiteTensor::apply_physical(const Mat& op) {
    for (int b = 0; b < r; ++b) {
        Eigen::Map<Mat> blk(data.data() + static_cast<Eigen::Index>(l) * d * b, l, d);
        blk = (blk * op.transpose()).eval();
    }
}

MpsState::MpsState(int n, int d, Truncation trunc) : n_(n), d_(d), trunc_(trunc) {
    if (n < 1) throw std::invalid_argument("chain needs at least one site");
    if (d < 2) throw std::invalid_argument("local dimension must be at least 2");
    if (trunc.chi_max < 1) throw std::invalid_argument("chi_max must be positive");
    sites_.resize(n);
    lambdas_.assign(n + 1, RVec::Ones(1));
}

MpsState MpsState::product_state(const std::vector<Vec>& kets, Truncation trunc) {
    if (kets.empty()) throw std::invalid_argument("product_state: no sites");
    const int d = static_cast<int>(kets.front().size());
    MpsState s(static_cast<int>(kets.size()), d, trunc);
    for (int j = 0; j < s.n_; ++j) {
        if (kets[j].size() != d) throw std::invalid_argument("product_state: inconsistent local dimension");
        double nrm = kets[j].norm();
        if (!(nrm > 0.0)) throw std::invalid_argument("product_state: zero ket at site " + std::to_string(j));
        SiteTensor t(1, d, 1);
        for (int i = 0; i < d; ++i) t(0, i, 0) = kets[j][i] / nrm;
        s.sites_[j] = std::move(t);
    }
    return s;
}

MpsState MpsState::from_state_vector(const Vec& psi, int n, int d, Truncation trunc) {
    MpsState s(n, d, trunc);
    Eigen::Index dim = 1;
    for (int j = 0; j < n; ++j) dim *= d;
    if (psi.size() != dim) throw std::invalid_argument("from_state_vector: length is not d^n");
    if (!(psi.norm() > 0.0)) throw std::invalid_argument("from_state_vector: zero vector");

    // Left-to-right QR sweep; row index of m is alpha + l*i, columns enumerate the remaining sites.
    Eigen::Index rest = dim / d;
    Mat m(d, rest);
    for (int i = 0; i < d; ++i)
        for (Eigen::Index c = 0; c < rest; ++c) m(i, c) = psi[i * rest + c];
    int l = 1;
    for (int j = 0; j < n - 1; ++j) {
        Eigen::HouseholderQR<Mat> qr(m);
        const int k = static_cast<int>(std::min(m.rows(), m.cols()));
        SiteTensor a(l, d, k);
        a.data = qr.householderQ() * Mat::Identity(m.rows(), k);
        Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        s.sites_[j] = std::move(a);
        const Eigen::Index next_rest = rest / d;
        Mat next(static_cast<Eigen::Index>(k) * d, next_rest);
        for (Eigen::Index c = 0; c < next_rest; ++c)
            for (int i = 0; i < d; ++i)
                for (int kk = 0; kk < k; ++kk) next(kk + static_cast<Eigen::Index>(k) * i, c) = r(kk, i * next_rest + c);
        m = std::move(next);
        rest = next_rest;
        l = k;
    }
    SiteTensor last(l, d, 1);
    last.data = m;
    s.sites_[n - 1] = std::move(last);
    s.center_ = n - 1;
    s.canonicalize();
    return s;
}

const RVec& MpsState::lambda(int bond) const {
    if (!is_canonical()) throw NonCanonicalError("Schmidt values requested in mixed gauge");
    if (bond < 0 || bond > n_) throw std::out_of_range("bond index outside chain");
    return lambdas_[bond];
}

int MpsState::bond_dim(int bond) const {
    if (bond < 1 || bond >= n_) throw std::out_of_range("bond index outside chain");
    return sites_[bond].l;
}

int MpsState::max_bond_dim() const {
    int m = 1;
    for (int b = 1; b < n_; ++b) m = std::max(m, sites_[b].l);
    return m;
}

SiteTensor MpsState::gamma(int j) const {
    require_site(j, n_);
    const RVec& lam = lambda(j + 1);
    SiteTensor g = sites_[j];
    for (int b = 0; b < g.r; ++b) g.data.col(b) /= std::max(lam[b], 1e-12);
    return g;
}

int MpsState::keep_count(const RVec& s, double* discarded) const {
    const double total = s.squaredNorm();
    if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("state norm vanished or is not finite");
    const double floor = std::max(trunc_.trunc_threshold, kSvdFloor) * std::sqrt(total);
    int k = std::min<int>(static_cast<int>(s.size()), trunc_.chi_max);
    while (k > 1 && s[k - 1] < floor) --k;
    if (trunc_.max_discarded_weight > 0.0) {
        double tail = 0.0;
        for (int m = k; m < s.size(); ++m) tail += s[m] * s[m];
        while (k > 1 && (tail + s[k - 1] * s[k - 1]) / total <= trunc_.max_discarded_weight) {
            tail += s[k - 1] * s[k - 1];
            --k;
        }
    }
    double tail = 0.0;
    for (int m = k; m < s.size(); ++m) tail += s[m] * s[m];
    *discarded = tail / total;
    return k;
}

double MpsState::apply_two_site_gate(int j, const Mat& u) {
    if (j < 0 || j + 1 >= n_) throw std::out_of_range("gate bond outside chain");
    if (u.rows() != d_ * d_ || u.cols() != d_ * d_) throw std::invalid_argument("gate must be d^2 x d^2");
    if (!is_canonical()) throw NonCanonicalError("two-site gate applied in mixed gauge; canonicalize first");

    SiteTensor& t1 = sites_[j];
    SiteTensor& t2 = sites_[j + 1];
    const int l = t1.l, r = t2.r, d = d_;

    Mat theta = t1.grouped_left() * t2.grouped_right();  // (l d) x (d r)
    // Column blocks for fixed right index are l x d^2 with column index i + d k.
    Mat p(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int ip = 0; ip < d; ++ip)
                for (int kp = 0; kp < d; ++kp) p(i + d * k, ip + d * kp) = u(ip * d + kp, i * d + k);
    for (int g = 0; g < r; ++g) {
        Eigen::Map<Mat> blk(theta.data() + static_cast<Eigen::Index>(l) * d * d * g, l, d * d);
        blk = (blk * p).eval();
    }

    Mat x = theta;
    const RVec& lam = lambdas_[j];
    for (int i = 0; i < d; ++i) x.middleRows(static_cast<Eigen::Index>(l) * i, l) = lam.cast<Complex>().asDiagonal() * x.middleRows(static_cast<Eigen::Index>(l) * i, l);

    Svd svd(x, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed in two-site update");
    const RVec& s = svd.singularValues();
    double disc = 0.0;
    const int k = keep_count(s, &disc);
    const double nrm = s.head(k).norm();

    Mat vk = svd.matrixV().leftCols(k);
    SiteTensor b2(k, d, r);
    b2.grouped_right() = vk.adjoint();
    SiteTensor b1(l, d, k);
    b1.data = theta * vk / nrm;
    t1 = std::move(b1);
    t2 = std::move(b2);
    lambdas_[j + 1] = s.head(k) / nrm;
    discarded_ += disc;
    return disc;
}

void MpsState::enter_center_mode() {
    if (center_ < 0) center_ = 0;
}

void MpsState::move_center(int j) {
    require_site(j, n_);
    enter_center_mode();
    while (center_ < j) {
        SiteTensor& c = sites_[center_];
        Eigen::HouseholderQR<Mat> qr(c.data);
        const int k = static_cast<int>(std::min(c.data.rows(), c.data.cols()));
        Mat q = qr.householderQ() * Mat::Identity(c.data.rows(), k);
        Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        SiteTensor a(c.l, c.d, k);
        a.data = std::move(q);
        SiteTensor& nx = sites_[center_ + 1];
        SiteTensor cn(k, nx.d, nx.r);
        cn.grouped_right() = r * nx.grouped_right();
        c = std::move(a);
        nx = std::move(cn);
        ++center_;
    }
    while (center_ > j) {
        SiteTensor& c = sites_[center_];
        Mat ct = c.grouped_right().adjoint();  // (d r) x l
        Eigen::HouseholderQR<Mat> qr(ct);
        const int k = static_cast<int>(std::min(ct.rows(), ct.cols()));
        Mat q = qr.householderQ() * Mat::Identity(ct.rows(), k);
        Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        SiteTensor b(k, c.d, c.r);
        b.grouped_right() = q.adjoint();
        SiteTensor& pv = sites_[center_ - 1];
        SiteTensor cn(pv.l, pv.d, k);
        cn.data = pv.data * r.adjoint();
        c = std::move(b);
        pv = std::move(cn);
        --center_;
    }
}

double MpsState::canonicalize() {
    if (is_canonical()) return 0.0;
    move_center(n_ - 1);
    double total = 0.0;
    for (int k = n_ - 1; k >= 1; --k) {
        SiteTensor& c = sites_[k];
        Svd svd(c.grouped_right(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success) throw NumericalError("SVD failed in canonicalization");
        const RVec& s = svd.singularValues();
        double disc = 0.0;
        const int keep = keep_count(s, &disc);
        const double nrm = s.head(keep).norm();
        SiteTensor b(keep, c.d, c.r);
        b.grouped_right() = svd.matrixV().leftCols(keep).adjoint();
        Mat us = svd.matrixU().leftCols(keep) * (s.head(keep) / nrm).asDiagonal();
        SiteTensor& pv = sites_[k - 1];
        SiteTensor cn(pv.l, pv.d, keep);
        cn.data = pv.data * us;
        c = std::move(b);
        pv = std::move(cn);
        lambdas_[k] = s.head(keep) / nrm;
        total += disc;
    }
    const double n0 = sites_[0].data.norm();
    if (!(n0 > 0.0) || !std::isfinite(n0)) throw NumericalError("state norm vanished or is not finite");
    sites_[0].data /= n0;
    center_ = -1;
    discarded_ += total;
    return total;
}

void MpsState::apply_single_site(int j, const Mat& op, bool renormalize) {
    require_site(j, n_);
    if (op.rows() != d_ || op.cols() != d_) throw std::invalid_argument("single-site operator must be d x d");
    double s2 = 0.0;
    if (is_canonical() && is_scaled_unitary(op, &s2) && (renormalize || std::abs(s2 - 1.0) < 1e-13)) {
        sites_[j].apply_physical(renormalize ? Mat(op / std::sqrt(s2)) : op);
        return;
    }
    move_center(j);
    sites_[j].apply_physical(op);
    if (renormalize) {
        const double nrm = sites_[j].data.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("operator annihilated the state");
        sites_[j].data /= nrm;
    }
}

Mat MpsState::reduced_density_matrix(int j) {
    require_site(j, n_);
    Mat rho = Mat::Zero(d_, d_);
    const SiteTensor* t = &sites_[j];
    if (is_canonical()) {
        const RVec w = lambdas_[j].array().square();
        for (int b = 0; b < t->r; ++b) {
            Eigen::Map<const Mat> blk(t->data.data() + static_cast<Eigen::Index>(t->l) * d_ * b, t->l, d_);
            rho.noalias() += blk.transpose() * w.asDiagonal() * blk.conjugate();
        }
        return rho;
    }
    move_center(j);
    t = &sites_[j];
    for (int b = 0; b < t->r; ++b) {
        Eigen::Map<const Mat> blk(t->data.data() + static_cast<Eigen::Index>(t->l) * d_ * b, t->l, d_);
        rho.noalias() += blk.transpose() * blk.conjugate();
    }
    return rho / rho.trace().real();
}

Complex MpsState::expectation(int j, const Mat& op) {
    Mat rho = reduced_density_matrix(j);
    return (op * rho).trace();
}

Complex MpsState::expectation_product(std::vector<std::pair<int, Mat>> ops) const {
    if (!is_canonical()) throw NonCanonicalError("expectation_product requires canonical gauge");
    if (ops.empty()) return 1.0;
    std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t k = 0; k < ops.size(); ++k) {
        require_site(ops[k].first, n_);
        if (k > 0 && ops[k].first == ops[k - 1].first) throw std::invalid_argument("expectation_product: repeated site");
    }
    const int first = ops.front().first;
    Mat f = lambdas_[first].array().square().matrix().cast<Complex>().asDiagonal();
    size_t k = 0;
    for (int j = first; j <= ops.back().first; ++j) {
        const Mat* op = nullptr;
        if (k < ops.size() && ops[k].first == j) op = &ops[k++].second;
        f = transfer_left(f, sites_[j], op);
    }
    return f.trace();
}

double MpsState::entanglement_entropy(int bond) const {
    if (bond < 1 || bond >= n_) throw std::out_of_range("cut outside chain");
    return shannon_bits(lambda(bond).array().square().matrix());
}

double MpsState::norm_squared() const {
    Mat f = Mat::Ones(1, 1);
    for (int j = 0; j < n_; ++j) f = transfer_left(f, sites_[j], nullptr);
    return f(0, 0).real();
}

Vec MpsState::to_dense() const {
    Mat m = sites_[0].grouped_left();  // rows: physical index of site 0
    for (int j = 1; j < n_; ++j) {
        const SiteTensor& t = sites_[j];
        Mat p = m * t.grouped_right();  // D x (d r)
        Mat next(m.rows() * d_, t.r);
        for (Eigen::Index row = 0; row < m.rows(); ++row)
            for (int i = 0; i < d_; ++i)
                for (int g = 0; g < t.r; ++g) next(row * d_ + i, g) = p(row, i + d_ * g);
        m = std::move(next);
    }
    return m.col(0);
}

Mat MpsState::left_environment(int bond, int op_site, const Mat* op) const {
    if (bond < 0 || bond > n_) throw std::out_of_range("bond index outside chain");
    if (op && (op_site < 0 || op_site >= bond)) throw std::invalid_argument("left environment operator must lie left of the bond");
    int start = bond;
    if (op) start = std::min(start, op_site);
    Mat f;
    if (is_canonical()) {
        f = lambdas_[start].array().square().matrix().cast<Complex>().asDiagonal();
    } else {
        start = std::min(start, center_);
        f = Mat::Identity(sites_[start].l, sites_[start].l);
    }
    for (int j = start; j < bond; ++j) f = transfer_left(f, sites_[j], (op && j == op_site) ? op : nullptr);
    return f;
}

Mat MpsState::right_environment(int bond, int op_site, const Mat* op) const {
    if (bond < 0 || bond > n_) throw std::out_of_range("bond index outside chain");
    if (op && (op_site < bond || op_site >= n_)) throw std::invalid_argument("right environment operator must lie right of the bond");
    int start = bond;
    if (op) start = std::max(start, op_site + 1);
    if (!is_canonical()) start = std::max(start, center_ + 1);
    const int dim = start == n_ ? 1 : sites_[start].l;
    Mat e = Mat::Identity(dim, dim);
    for (int j = start - 1; j >= bond; --j) e = transfer_right(e, sites_[j], (op && j == op_site) ? op : nullptr);
    return e;
}

namespace {

constexpr char kMagic[8] = {'E', 'O', 'Q', 'T', 'M', 'P', 'S', '1'};

template <class T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("checkpoint truncated");
    return v;
}

}  // namespace

void MpsState::write_checkpoint(const std::string& path) const {
    if (!is_canonical()) throw NonCanonicalError("checkpoint requires canonical gauge");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f.write(kMagic, 8);
    put<std::uint64_t>(f, n_);
    put<std::uint64_t>(f, d_);
    put<std::uint64_t>(f, trunc_.chi_max);
    for (const SiteTensor& t : sites_) {
        put<std::uint64_t>(f, t.l);
        put<std::uint64_t>(f, t.d);
        put<std::uint64_t>(f, t.r);
        for (int a = 0; a < t.l; ++a)
            for (int i = 0; i < t.d; ++i)
                for (int b = 0; b < t.r; ++b) {
                    put<double>(f, t(a, i, b).real());
                    put<double>(f, t(a, i, b).imag());
                }
    }
    for (int b = 1; b < n_; ++b) {
        put<std::uint64_t>(f, lambdas_[b].size());
        for (Eigen::Index k = 0; k < lambdas_[b].size(); ++k) put<double>(f, lambdas_[b][k]);
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

MpsState MpsState::read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not an MPS checkpoint: " + path);
    const auto n = static_cast<int>(get<std::uint64_t>(f));
    const auto d = static_cast<int>(get<std::uint64_t>(f));
    Truncation tr;
    tr.chi_max = static_cast<int>(get<std::uint64_t>(f));
    MpsState s(n, d, tr);
    for (int j = 0; j < n; ++j) {
        const auto l = static_cast<int>(get<std::uint64_t>(f));
        const auto dd = static_cast<int>(get<std::uint64_t>(f));
        const auto r = static_cast<int>(get<std::uint64_t>(f));
        if (dd != d) throw std::runtime_error("checkpoint local dimension mismatch");
        if (j > 0 && l != s.sites_[j - 1].r) throw std::runtime_error("checkpoint bond dimensions inconsistent");
        SiteTensor t(l, d, r);
        for (int a = 0; a < l; ++a)
            for (int i = 0; i < d; ++i)
                for (int b = 0; b < r; ++b) {
                    const double re = get<double>(f);
                    const double im = get<double>(f);
                    t(a, i, b) = Complex(re, im);
                }
        s.sites_[j] = std::move(t);
    }
    for (int b = 1; b < n; ++b) {
        const auto len = static_cast<Eigen::Index>(get<std::uint64_t>(f));
        if (len != s.sites_[b].l) throw std::runtime_error("checkpoint Schmidt vector length mismatch");
        RVec lam(len);
        for (Eigen::Index k = 0; k < len; ++k) lam[k] = get<double>(f);
        s.lambdas_[b] = std::move(lam);
    }
    return s;
}

SchmidtBlocks schmidt_operator_blocks(MpsState& state, int cut, int site, const std::vector<Mat>& ops) {
    const int n = state.size();
    if (cut < 1 || cut >= n) throw std::out_of_range("cut outside chain");
    require_site(site, n);
    SchmidtBlocks out;
    out.op_right = site >= cut;
    out.blocks.reserve(ops.size());

    auto op_env = [&](const Mat* op) {
        return out.op_right ? state.right_environment(cut, site, op) : state.left_environment(cut, site, op);
    };

    if (state.is_canonical()) {
        const RVec& lam = state.lambda(cut);
        out.weights = lam.array().square();
        for (const Mat& op : ops) {
            Mat g = op_env(&op);
            if (out.op_right) g = lam.cast<Complex>().asDiagonal() * g * lam.cast<Complex>().asDiagonal();
            out.blocks.push_back(std::move(g));
        }
        return out;
    }

    const int c = state.center();
    const bool other_orthonormal = out.op_right ? (c >= cut) : (c < cut);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    double norm2 = 0.0;
    if (other_orthonormal) {
        Mat g1 = op_env(nullptr);
        norm2 = g1.trace().real();
        es.compute(g1);
    } else {
        Mat gx = out.op_right ? state.left_environment(cut) : state.right_environment(cut);
        norm2 = gx.trace().real();
        es.compute(Mat(gx.transpose()));
    }
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed at cut");
    if (!(norm2 > 0.0)) throw NumericalError("state norm vanished");
    const Eigen::Index m = es.eigenvalues().size();
    RVec xi(m);
    Mat w(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        xi[k] = std::max(0.0, es.eigenvalues()[m - 1 - k]) / norm2;
        w.col(k) = es.eigenvectors().col(m - 1 - k);
    }
    out.weights = xi;
    const RVec sq = xi.array().sqrt();
    for (const Mat& op : ops) {
        Mat b = w.adjoint() * op_env(&op) * w;
        if (other_orthonormal)
            b /= norm2;
        else
            b = sq.cast<Complex>().asDiagonal() * b * sq.cast<Complex>().asDiagonal();
        out.blocks.push_back(std::move(b));
    }
    return out;
}

Mat schmidt_operator_block(MpsState& state, int cut, int site, const Mat& op) {
    return schmidt_operator_blocks(state, cut, site, {op}).blocks.front();
}

}  // namespace eoqt
