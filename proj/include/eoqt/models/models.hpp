#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "eoqt/common.hpp"
#include "eoqt/dense/dense_state.hpp"
#include "eoqt/dense/lindblad.hpp"
#include "eoqt/engine/rng.hpp"
#include "eoqt/propagators/channel.hpp"
#include "eoqt/tensor/mps.hpp"

namespace eoqt {

struct BondGate {
    int site = 0;  // gate acts on (site, site+1)
    Mat u;
};

struct ModelSpec {
    std::string name;
    int n = 0;
    int d = 2;
    std::vector<JumpChannel> channels;
    std::vector<Vec> initial_kets;  // product initial state
    Vec initial_vector;             // used instead of the kets when non-empty
    std::vector<Mat> bond_hamiltonians;  // n-1 terms (d^2 x d^2) or empty
    // Random gate layer drawn afresh each step; empty for time-independent models.
    std::function<std::vector<BondGate>(double dt, Rng& rng)> random_layer;

    MpsState initial_state(const Truncation& trunc) const;
    dense::DenseState initial_dense() const;
    Mat dense_hamiltonian() const;
    dense::MasterEquation master_equation() const;
};

// exp(-i h dt) on bonds starting at even sites, then on odd sites.
std::vector<BondGate> trotter_layer(const std::vector<Mat>& bond_hamiltonians, int d, double dt);

struct IsingParams {
    double h = -0.5;
    double g = 2.5;
    double J = 0.5;
    double gamma = 1.0;
};

struct EitParams {
    double omega1 = 0.5;
    double omega2 = 0.5;
    double V = 1.0;
    double gamma = 1.0;
};

struct RbcParams {
    double alpha = 1.0;
    double gamma = 10.0;
    bool include_identity = true;
};

// Two qubits in (|00> + |11>)/sqrt2, H = 0, c = |1><1| on each qubit.
ModelSpec bell_model(double gamma = 1.0);
// H = sum_j (h sz - g sx) + J sum_j sz sz, c = |0><1|, initial |1...1>.
ModelSpec ising_model(const IsingParams& p, int n);
// Three-level ladder |g1>, |g2>, |r> (indices 0, 1, 2), c = |r><r|, initial |g1...g1>.
ModelSpec eit_model(const EitParams& p, int n);
// Sixteen couplings G^{kl} ~ N(0, alpha/dt) for one bond, k,l over (1, x, y, z), index 4k + l.
std::array<double, 16> rbc_draw(double alpha, double dt, Rng& rng);
// sum_{kl} G^{kl} sigma^k x sigma^l, optionally without the identity term.
Mat rbc_generator(const std::array<double, 16>& coeffs, bool include_identity);

// Brownian two-qubit gates with c = sz monitoring, initial |1...1>.
ModelSpec rbc_model(const RbcParams& p, int n);

}  // namespace eoqt
