#pragma once

namespace eoqt::bell {

// Expected entanglement of the Bell pair after a total log-likelihood shift s.
double sigma(double s);
// Number unraveling with both channels at rate gamma: sigma(2 gamma t).
double eaee_number(double gamma_t);
// Homodyne average E[sigma(S)], S ~ N(2 tau, 4 tau), integrated over the real line.
double eaee_homodyne(double tau, double tol = 1e-8);
// tau for homodyne phases phi1, phi2 at time gamma t.
double homodyne_tau(double gamma_t, double phi1, double phi2);
double entanglement_of_formation(double gamma_t);

}  // namespace eoqt::bell
