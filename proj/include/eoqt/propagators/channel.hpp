#pragma once

#include <concepts>

#include "eoqt/common.hpp"

namespace eoqt {

struct JumpChannel {
    int site = 0;
    Mat op;  // d x d jump operator c
    double rate = 1.0;
};

// Per-channel matrices that depend only on (c, rate, dt).
struct PreparedChannel {
    PreparedChannel(JumpChannel ch, double dt);

    JumpChannel channel;
    double dt;
    Mat cdc;      // c^dagger c
    Mat no_jump;  // exp(-rate dt c^dagger c / 2)
};

// Anything that can report a local expectation and absorb a single-site operator.
template <class S>
concept SingleSiteBackend = requires(S& s, int j, const Mat& op) {
    { s.expectation(j, op) } -> std::convertible_to<Complex>;
    s.apply_single_site(j, op, true);
};

}  // namespace eoqt
