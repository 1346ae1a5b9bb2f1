#include "eoqt/dense/lindblad.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>

#include "eoqt/dense/dense_state.hpp"

namespace eoqt::dense {

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;

// Embedded local operators are very sparse, so the right-hand side is evaluated with sparse products.
struct Generator {
    std::vector<Sparse> jumps;  // sqrt(rate) * embedded operator
    std::vector<Sparse> jumps_adj;
    Mat decay;                  // sum L^dagger L / 2

    Mat rhs(const Mat& rho, const Mat& h) const {
        const Sparse heff = Mat(-kI * (h - kI * decay)).sparseView();
        const Sparse heff_adj = heff.adjoint();
        Mat out = heff * rho;
        out.noalias() += rho * heff_adj;
        for (size_t k = 0; k < jumps.size(); ++k) {
            const Mat lr = jumps[k] * rho;
            out.noalias() += lr * jumps_adj[k];
        }
        return out;
    }
};

}  // namespace

std::vector<Mat> integrate_me(const Mat& rho0, const MasterEquation& me, const std::vector<double>& times,
                              const MeOptions& opt) {
    if (me.n < 1 || me.n * std::log2(static_cast<double>(me.d)) > 20.0 + 1e-9)
        throw std::invalid_argument("dense master equation limited to n*log2(d) <= 20");
    if (!(opt.dt > 0.0)) throw std::invalid_argument("integration step must be positive");
    Eigen::Index dim = 1;
    for (int j = 0; j < me.n; ++j) dim *= me.d;
    if (rho0.rows() != dim || rho0.cols() != dim) throw std::invalid_argument("rho0 has wrong dimension");

    Generator g;
    g.decay = Mat::Zero(dim, dim);
    for (const LocalChannel& c : me.channels) {
        Mat l = std::sqrt(c.rate) * embed(c.op, c.site, me.n, me.d);
        g.decay += 0.5 * l.adjoint() * l;
        g.jumps.push_back(l.sparseView());
        g.jumps_adj.push_back(Sparse(l.adjoint().sparseView()));
    }

    std::vector<Mat> out;
    out.reserve(times.size());
    Mat rho = rho0;
    double t = 0.0;
    for (double target : times) {
        if (target < t - 1e-12) throw std::invalid_argument("sample times must be ascending and non-negative");
        const auto steps = static_cast<long>(std::llround((target - t) / opt.dt));
        const double h = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
        for (long s = 0; s < steps; ++s) {
            const Mat h0 = me.hamiltonian(t);
            const Mat hm = me.hamiltonian(t + 0.5 * h);
            const Mat h1 = me.hamiltonian(t + h);
            const Mat k1 = g.rhs(rho, h0);
            const Mat k2 = g.rhs(rho + 0.5 * h * k1, hm);
            const Mat k3 = g.rhs(rho + 0.5 * h * k2, hm);
            const Mat k4 = g.rhs(rho + h * k3, h1);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            rho = (0.5 * (rho + rho.adjoint())).eval();
            t += h;
            const double drift = std::abs(rho.trace().real() - 1.0);
            if (!(drift <= opt.trace_tolerance))
                throw NumericalError("master equation trace drifted by " + std::to_string(drift));
        }
        t = target;
        out.push_back(rho);
    }
    return out;
}

double concurrence_2q(const Mat& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw std::invalid_argument("concurrence needs a 4x4 density matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("density matrix is not positive");
    const Mat yy = ops::kron(ops::sigma_y(), ops::sigma_y());
    const Mat tilde = yy * rho.conjugate() * yy;
    const RVec ev = es.eigenvalues().cwiseMax(0.0);
    const Mat sq = es.eigenvectors() * ev.cwiseSqrt().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> r(sq * tilde * sq);
    RVec l = r.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(l.data(), l.data() + l.size(), std::greater<double>());
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

double entanglement_of_formation_2q(const Mat& rho) {
    const double c = std::min(1.0, concurrence_2q(rho));
    return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

std::vector<ToyStrategy> toy_example_decompositions() {
    // Qubit order: system 1, system 2, environment 1, environment 2.
    Vec sys(4);
    sys << 0.5, 0.5, 0.5, -0.5;
    Vec joint = Vec::Zero(16);
    for (int s = 0; s < 4; ++s) {
        const int s1 = s >> 1, s2 = s & 1;
        joint[(s1 << 3) | (s2 << 2) | (s1 << 1) | s2] = sys[s];
    }

    Vec zero(2), one(2), plus(2), minus(2);
    zero << 1.0, 0.0;
    one << 0.0, 1.0;
    plus << M_SQRT1_2, M_SQRT1_2;
    minus << M_SQRT1_2, -M_SQRT1_2;

    auto outcome = [&](const std::string& label, const Vec& e1, const Vec& e2) {
        Vec cond = Vec::Zero(4);
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) cond[s] += std::conj(e1[a]) * std::conj(e2[b]) * joint[(s << 2) | (a << 1) | b];
        ToyOutcome o;
        o.label = label;
        o.probability = cond.squaredNorm();
        o.state = cond / std::sqrt(o.probability);
        return o;
    };

    std::vector<ToyStrategy> out(3);
    out[0].name = "computational";
    out[0].outcomes = {outcome("00", zero, zero), outcome("01", zero, one), outcome("10", one, zero),
                       outcome("11", one, one)};
    out[1].name = "plus_minus";
    out[1].outcomes = {outcome("++", plus, plus), outcome("+-", plus, minus), outcome("-+", minus, plus),
                       outcome("--", minus, minus)};
    out[2].name = "adaptive";
    out[2].outcomes = {outcome("00", zero, zero), outcome("01", zero, one), outcome("1+", one, plus),
                       outcome("1-", one, minus)};
    return out;
}

}  // namespace eoqt::dense
