#pragma once

#include "eoqt/common.hpp"
#include "eoqt/propagators/channel.hpp"

namespace eoqt {

class MpsState;
namespace dense {
class DenseState;
}

// Everything the entanglement-rate formulas need about one channel at one cut.
struct RateInputs {
    RVec xi;            // Schmidt weights, descending
    Complex a0 = 0.0;   // <c>
    Mat a_mat;          // c-reduced operator in the Schmidt basis
    double jump_weight = 0.0;  // <c^dagger c>
    Mat reduced_jump;   // (c phi c^dagger)-reduced operator in the Schmidt basis
    double gamma = 0.0;
};

RateInputs rate_inputs(MpsState& state, const JumpChannel& ch, int cut);
RateInputs rate_inputs(const dense::DenseState& state, const JumpChannel& ch, int cut);

// Expected rate of change of the half-cut entanglement entropy (bits per unit time).
double rate_number(const RateInputs& in);
double rate_homodyne(const RateInputs& in, double phi);
// General diffusive unraveling with squeezing parameters 0 <= r <= s <= 1 and phase beta.
double rate_general(const RateInputs& in, double r, double s, double beta);

struct PhaseOptimum {
    double phi = 0.0;         // in [0, pi)
    double rate = 0.0;        // rate_homodyne at phi
    double fitted_rate = 0.0; // minimum of the trigonometric fit
};
PhaseOptimum optimal_phase(const RateInputs& in);

enum class PropagatorKind { Number, Homodyne };

struct PropagatorChoice {
    PropagatorKind kind = PropagatorKind::Homodyne;
    double phase = 0.0;
    double rate = 0.0;
    double rate_number = 0.0;
    double rate_homodyne = 0.0;
};

// Picks the unraveling with the lower rate; exact ties go to homodyne.
PropagatorChoice choose_propagator(const RateInputs& in);
PropagatorChoice choose_propagator(MpsState& state, const JumpChannel& ch, int cut);

// (ln x - ln y) / (x - y), 1/x on the diagonal.
double log_kernel(double x, double y);

}  // namespace eoqt
