#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eoqt/common.hpp"

namespace eoqt::dense {

struct LocalChannel {
    int site = 0;
    Mat op;
    double rate = 1.0;
};

using HamiltonianFn = std::function<Mat(double)>;

struct MasterEquation {
    int n = 0;
    int d = 2;
    HamiltonianFn hamiltonian;  // full d^n x d^n matrix
    std::vector<LocalChannel> channels;
};

struct MeOptions {
    double dt = 1e-3;
    double trace_tolerance = 1e-6;
};

// RK4 integration; returns rho at each requested time (ascending, starting at or after 0).
std::vector<Mat> integrate_me(const Mat& rho0, const MasterEquation& me, const std::vector<double>& times,
                              const MeOptions& opt = {});

// Wootters concurrence and entanglement of formation for two qubits.
double concurrence_2q(const Mat& rho);
double entanglement_of_formation_2q(const Mat& rho);

struct ToyOutcome {
    std::string label;
    double probability = 0.0;
    Vec state;  // normalized two-qubit system state
};

struct ToyStrategy {
    std::string name;
    std::vector<ToyOutcome> outcomes;
};

// Two system qubits copied by CNOTs onto two environment qubits, then the environment
// is measured in the computational basis, the +/- basis, or adaptively.
std::vector<ToyStrategy> toy_example_decompositions();

}  // namespace eoqt::dense
