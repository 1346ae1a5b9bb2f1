#include "eoqt/rates/rates.hpp"

#include <cmath>

#include "eoqt/dense/dense_state.hpp"
#include "eoqt/tensor/mps.hpp"

namespace eoqt {

namespace {

constexpr double kZeroJump = 1e-14;
constexpr double kKernelRel = 1e-8;

RateInputs assemble(RVec xi, std::vector<Mat> blocks, double gamma) {
    RateInputs in;
    in.xi = std::move(xi);
    in.a_mat = std::move(blocks[0]);
    in.reduced_jump = std::move(blocks[1]);
    in.a0 = in.a_mat.trace();
    in.jump_weight = in.reduced_jump.trace().real();
    in.gamma = gamma;
    return in;
}

}  // namespace

double log_kernel(double x, double y) {
    if (std::abs(x - y) < kKernelRel * std::max(x, y)) return 1.0 / x;
    return (std::log(x) - std::log(y)) / (x - y);
}

RateInputs rate_inputs(MpsState& state, const JumpChannel& ch, int cut) {
    const Mat cdc = ch.op.adjoint() * ch.op;
    SchmidtBlocks sb = schmidt_operator_blocks(state, cut, ch.site, {ch.op, cdc});
    return assemble(std::move(sb.weights), std::move(sb.blocks), ch.rate);
}

RateInputs rate_inputs(const dense::DenseState& state, const JumpChannel& ch, int cut) {
    const Mat cdc = ch.op.adjoint() * ch.op;
    dense::DenseSchmidt sb = dense::dense_schmidt_blocks(state, cut, ch.site, {ch.op, cdc});
    return assemble(std::move(sb.weights), std::move(sb.blocks), ch.rate);
}

double rate_number(const RateInputs& in) {
    const double w = in.jump_weight;
    if (w < kZeroJump) return 0.0;
    double diag = 0.0;
    for (Eigen::Index k = 0; k < in.xi.size(); ++k)
        if (in.xi[k] >= kEpsEig) diag += in.reduced_jump(k, k).real() * std::log2(in.xi[k]);
    Eigen::SelfAdjointEigenSolver<Mat> es(in.reduced_jump, Eigen::EigenvaluesOnly);
    double ent = 0.0;
    for (Eigen::Index m = 0; m < es.eigenvalues().size(); ++m) {
        const double y = es.eigenvalues()[m];
        if (y >= kEpsEig) ent += y * std::log2(y);
    }
    return in.gamma * (w * std::log2(w) + diag - ent);
}

double rate_homodyne(const RateInputs& in, double phi) {
    const Complex e = std::exp(kI * phi);
    const Complex ec = std::conj(e);
    const double z0 = std::norm(e * in.a0 + ec * std::conj(in.a0));
    const Eigen::Index m = in.xi.size();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (in.xi[k] < kEpsEig) continue;
        for (Eigen::Index l = 0; l < m; ++l) {
            if (in.xi[l] < kEpsEig) continue;
            sum += log_kernel(in.xi[k], in.xi[l]) * std::norm(e * in.a_mat(k, l) + ec * std::conj(in.a_mat(l, k)));
        }
    }
    return in.gamma / (2.0 * kLn2) * (z0 - sum);
}

double rate_general(const RateInputs& in, double r, double s, double beta) {
    if (!(r >= 0.0 && r <= s && s <= 1.0)) throw std::invalid_argument("unraveling parameters need 0 <= r <= s <= 1");
    const Eigen::Index m = in.xi.size();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (in.xi[k] < kEpsEig) continue;
        for (Eigen::Index l = 0; l < m; ++l)
            if (in.xi[l] >= kEpsEig) sum += log_kernel(in.xi[k], in.xi[l]) * std::norm(in.a_mat(k, l));
    }
    const double averaged = in.gamma / kLn2 * (std::norm(in.a0) - sum);
    double out = (s * s - r * r) * averaged;
    if (r > 0.0) out += r * r * rate_homodyne(in, beta);
    if (s < 1.0) out += (1.0 - s * s) * rate_number(in);
    return out;
}

PhaseOptimum optimal_phase(const RateInputs& in) {
    // rate(phi) = u + v cos 2phi + w sin 2phi exactly.
    const double r0 = rate_homodyne(in, 0.0);
    const double r45 = rate_homodyne(in, 0.25 * M_PI);
    const double r90 = rate_homodyne(in, 0.5 * M_PI);
    const double u = 0.5 * (r0 + r90);
    const double v = 0.5 * (r0 - r90);
    const double w = r45 - u;
    PhaseOptimum out;
    // No phase dependence (e.g. a product state) resolves to phi = 0.
    const double scale = std::abs(u) + std::abs(v) + std::abs(w);
    double phi = std::hypot(v, w) <= 1e-14 * scale || scale == 0.0 ? 0.0 : 0.5 * std::atan2(-w, -v);
    if (phi < 0.0) phi += M_PI;
    if (phi >= M_PI) phi -= M_PI;
    out.phi = phi;
    out.fitted_rate = u - std::hypot(v, w);
    out.rate = rate_homodyne(in, phi);
    return out;
}

PropagatorChoice choose_propagator(const RateInputs& in) {
    PropagatorChoice c;
    const PhaseOptimum opt = optimal_phase(in);
    c.rate_number = rate_number(in);
    c.rate_homodyne = opt.rate;
    c.phase = opt.phi;
    if (c.rate_number < c.rate_homodyne - 1e-12) {
        c.kind = PropagatorKind::Number;
        c.rate = c.rate_number;
    } else {
        c.kind = PropagatorKind::Homodyne;
        c.rate = c.rate_homodyne;
    }
    return c;
}

PropagatorChoice choose_propagator(MpsState& state, const JumpChannel& ch, int cut) {
    return choose_propagator(rate_inputs(state, ch, cut));
}

}  // namespace eoqt
