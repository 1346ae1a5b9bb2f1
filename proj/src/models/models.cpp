#include "eoqt/models/models.hpp"

#include <cmath>

namespace eoqt {

MpsState ModelSpec::initial_state(const Truncation& trunc) const {
    if (initial_vector.size() > 0) return MpsState::from_state_vector(initial_vector, n, d, trunc);
    return MpsState::product_state(initial_kets, trunc);
}

dense::DenseState ModelSpec::initial_dense() const {
    if (initial_vector.size() > 0) return dense::DenseState(initial_vector, n, d);
    return dense::DenseState::product(initial_kets);
}

Mat ModelSpec::dense_hamiltonian() const {
    if (random_layer) throw std::logic_error(name + ": random gate layers have no fixed Hamiltonian");
    Eigen::Index dim = 1;
    for (int j = 0; j < n; ++j) dim *= d;
    Mat h = Mat::Zero(dim, dim);
    for (int b = 0; b < static_cast<int>(bond_hamiltonians.size()); ++b) {
        Mat term = Mat::Identity(1, 1);
        for (int j = 0; j < n; ++j) {
            if (j == b) {
                term = ops::kron(term, bond_hamiltonians[b]);
                ++j;
            } else {
                term = ops::kron(term, Mat(Mat::Identity(d, d)));
            }
        }
        h += term;
    }
    return h;
}

dense::MasterEquation ModelSpec::master_equation() const {
    dense::MasterEquation me;
    me.n = n;
    me.d = d;
    const Mat h = dense_hamiltonian();
    me.hamiltonian = [h](double) { return h; };
    for (const JumpChannel& c : channels) me.channels.push_back({c.site, c.op, c.rate});
    return me;
}

std::vector<BondGate> trotter_layer(const std::vector<Mat>& bond_hamiltonians, int d, double dt) {
    std::vector<BondGate> out;
    for (int parity = 0; parity < 2; ++parity)
        for (int b = parity; b < static_cast<int>(bond_hamiltonians.size()); b += 2) {
            if (bond_hamiltonians[b].rows() != d * d) throw std::invalid_argument("bond Hamiltonian must be d^2 x d^2");
            if (!is_hermitian(bond_hamiltonians[b])) throw std::invalid_argument("bond Hamiltonian is not Hermitian");
            out.push_back({b, unitary_exp(bond_hamiltonians[b], dt)});
        }
    return out;
}

ModelSpec bell_model(double gamma) {
    ModelSpec m;
    m.name = "bell";
    m.n = 2;
    m.d = 2;
    m.initial_vector = Vec::Zero(4);
    m.initial_vector[0] = M_SQRT1_2;
    m.initial_vector[3] = M_SQRT1_2;
    for (int j = 0; j < 2; ++j) m.channels.push_back({j, ops::ket_bra(2, 1, 1), gamma});
    return m;
}

ModelSpec ising_model(const IsingParams& p, int n) {
    if (n < 2) throw std::invalid_argument("ising model needs n >= 2");
    ModelSpec m;
    m.name = "ising";
    m.n = n;
    m.d = 2;
    const Mat id = Mat::Identity(2, 2);
    const Mat field = p.h * ops::sigma_z() - p.g * ops::sigma_x();
    for (int b = 0; b + 1 < n; ++b) {
        const double wl = b == 0 ? 1.0 : 0.5;
        const double wr = b + 1 == n - 1 ? 1.0 : 0.5;
        m.bond_hamiltonians.push_back(p.J * ops::kron(ops::sigma_z(), ops::sigma_z()) + wl * ops::kron(field, id) +
                                      wr * ops::kron(id, field));
    }
    Vec up(2);
    up << 0.0, 1.0;
    m.initial_kets.assign(n, up);
    for (int j = 0; j < n; ++j) m.channels.push_back({j, ops::ket_bra(2, 0, 1), p.gamma});
    return m;
}

ModelSpec eit_model(const EitParams& p, int n) {
    if (n < 2) throw std::invalid_argument("eit model needs n >= 2");
    ModelSpec m;
    m.name = "eit";
    m.n = n;
    m.d = 3;
    const Mat id = Mat::Identity(3, 3);
    const Mat lower1 = ops::ket_bra(3, 0, 2);
    const Mat lower2 = ops::ket_bra(3, 1, 2);
    const Mat drive = -(0.5 * p.omega1 * (lower1 + lower1.adjoint()) + 0.5 * p.omega2 * (lower2 + lower2.adjoint()));
    const Mat sz1 = ops::ket_bra(3, 2, 2) - ops::ket_bra(3, 0, 0);
    for (int b = 0; b + 1 < n; ++b) {
        const double wl = b == 0 ? 1.0 : 0.5;
        const double wr = b + 1 == n - 1 ? 1.0 : 0.5;
        m.bond_hamiltonians.push_back(p.V * ops::kron(sz1, sz1) + wl * ops::kron(drive, id) + wr * ops::kron(id, drive));
    }
    Vec g1 = Vec::Zero(3);
    g1[0] = 1.0;
    m.initial_kets.assign(n, g1);
    for (int j = 0; j < n; ++j) m.channels.push_back({j, ops::ket_bra(3, 2, 2), p.gamma});
    return m;
}

std::array<double, 16> rbc_draw(double alpha, double dt, Rng& rng) {
    const double sd = std::sqrt(alpha / dt);
    std::array<double, 16> g{};
    for (double& x : g) x = sd * rng.normal();
    return g;
}

Mat rbc_generator(const std::array<double, 16>& coeffs, bool include_identity) {
    static const std::vector<Mat> basis = [] {
        const std::vector<Mat> paulis{ops::identity(2), ops::sigma_x(), ops::sigma_y(), ops::sigma_z()};
        std::vector<Mat> out;
        for (const Mat& a : paulis)
            for (const Mat& b : paulis) out.push_back(ops::kron(a, b));
        return out;
    }();
    Mat g = Mat::Zero(4, 4);
    for (size_t k = include_identity ? 0 : 1; k < basis.size(); ++k) g += coeffs[k] * basis[k];
    return g;
}

ModelSpec rbc_model(const RbcParams& p, int n) {
    if (n < 2) throw std::invalid_argument("rbc model needs n >= 2");
    if (!(p.alpha >= 0.0)) throw std::invalid_argument("rbc coupling variance must be non-negative");
    ModelSpec m;
    m.name = "rbc";
    m.n = n;
    m.d = 2;
    Vec up(2);
    up << 0.0, 1.0;
    m.initial_kets.assign(n, up);
    for (int j = 0; j < n; ++j) m.channels.push_back({j, ops::sigma_z(), p.gamma});

    const RbcParams params = p;
    m.random_layer = [params, n](double dt, Rng& rng) {
        std::vector<BondGate> out;
        for (int parity = 0; parity < 2; ++parity)
            for (int b = parity; b + 1 < n; b += 2)
                out.push_back({b, unitary_exp(rbc_generator(rbc_draw(params.alpha, dt, rng), params.include_identity), dt)});
        return out;
    };
    return m;
}

}  // namespace eoqt
