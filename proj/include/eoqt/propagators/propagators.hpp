#pragma once

#include <cmath>
#include <stdexcept>

#include "eoqt/propagators/channel.hpp"

namespace eoqt {

inline constexpr double kMaxHomodyneRateDt = 0.1;

// Jump if u < rate dt <c^dagger c>, otherwise the no-jump evolution. Returns true on a jump.
template <SingleSiteBackend S>
bool number_step(S& state, const PreparedChannel& pc, double u) {
    const JumpChannel& ch = pc.channel;
    const double p = ch.rate * pc.dt * std::real(state.expectation(ch.site, pc.cdc));
    if (!(p < 1.0)) throw std::domain_error("jump probability per step reached 1; reduce dt");
    if (u < p) {
        state.apply_single_site(ch.site, ch.op, true);
        return true;
    }
    state.apply_single_site(ch.site, pc.no_jump, true);
    return false;
}

// Measurement record increment for homodyne detection at phase phi, evaluated on the current state.
template <SingleSiteBackend S>
double homodyne_record(S& state, const PreparedChannel& pc, double phi, double dw) {
    const JumpChannel& ch = pc.channel;
    const Complex c = state.expectation(ch.site, ch.op);
    return std::sqrt(ch.rate) * 2.0 * std::real(std::exp(kI * phi) * c) * pc.dt + dw;
}

// K = exp(-rate dt c^dagger c / 2) + sqrt(rate) e^{i phi} c dxi. Returns dxi.
template <SingleSiteBackend S>
double homodyne_step(S& state, const PreparedChannel& pc, double phi, double dw) {
    const JumpChannel& ch = pc.channel;
    if (ch.rate * pc.dt > kMaxHomodyneRateDt) throw std::domain_error("rate*dt above 0.1 for homodyne step");
    const double dxi = homodyne_record(state, pc, phi, dw);
    const Mat k = pc.no_jump + std::sqrt(ch.rate) * std::exp(kI * phi) * dxi * ch.op;
    state.apply_single_site(ch.site, k, true);
    return dxi;
}

// exp(e^{i phi} sqrt(rate) c dxi), valid for c^dagger c = 1. Returns dxi.
template <SingleSiteBackend S>
double exponential_form_step(S& state, const PreparedChannel& pc, double phi, double dw) {
    const JumpChannel& ch = pc.channel;
    if (!pc.cdc.isIdentity(1e-12)) throw std::invalid_argument("exponential form requires c^dagger c = 1");
    const double dxi = homodyne_record(state, pc, phi, dw);
    state.apply_single_site(ch.site, matrix_exp(Mat(std::exp(kI * phi) * std::sqrt(ch.rate) * dxi * ch.op)), true);
    return dxi;
}

}  // namespace eoqt
