#pragma once

#include <span>
#include <string>
#include <vector>

#include "qrev/linalg.hpp"
#include "qrev/model.hpp"

namespace qrev {

/// Eigenpairs of E + dx B restricted to the window. For dx == 0 the result
/// is diag(E) with the identity as eigenvectors, bit for bit.
linalg::Eigensystem window_eigensystem(const QuantizedModel& model, double dx);

/// Forward H1 = E + eps B and backward H2 = E - eps B.
struct EvolutionPair {
    linalg::Eigensystem h1;
    linalg::Eigensystem h2;
    double epsilon_evol = 0.0;
    double hbar = 0.0;
};

EvolutionPair make_evolution_pair(const QuantizedModel& model, double epsilon_evol);

/// Pair built from explicit matrices; used for toy models and oracle checks.
EvolutionPair make_evolution_pair(const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2, double hbar);

/// psi(t) = V exp(-i Lambda t / hbar) V^T psi. Negative t runs backwards.
StateVector evolve(const StateVector& psi, const linalg::Eigensystem& h, double t, double hbar);

/// |<psi| U2(t2)^-1 U1(t1) |psi>|^2
double return_probability(const StateVector& psi, const EvolutionPair& pair, double t1, double t2);

/// P(t, 0) = |<psi| U(t) |psi>|^2 on a time grid.
std::vector<double> survival_trace(const StateVector& psi, const linalg::Eigensystem& h, double hbar,
                                   std::span<const double> times);

/// P(t, t) = |<psi| U2(t)^-1 U1(t) |psi>|^2 on a time grid.
std::vector<double> fidelity_trace(const StateVector& psi, const EvolutionPair& pair, std::span<const double> times);

/// `n_samples` equal steps over [0, period]; n_samples + 1 points, with T/2 and
/// T stored exactly. n_samples must be even.
std::vector<double> uniform_grid(double period, std::size_t n_samples);

struct EchoTrace {
    double period = 0.0;
    std::vector<double> times;
    std::vector<double> p;
    std::size_t reversal_index = 0;
    std::string config_ref;
};

/// P(t) = P(t, 0) under H1 for t <= T/2 and P(T/2, t - T/2) afterwards.
EchoTrace echo_trace(const StateVector& psi, const EvolutionPair& pair, double period, std::size_t n_samples = 512);

inline constexpr std::size_t kDefaultSurfaceCellCap = 4'000'000;

/// surface(i, j) = P(t1[i], t2[j]).
Eigen::MatrixXd surface(const StateVector& psi, const EvolutionPair& pair, std::span<const double> t1_grid,
                        std::span<const double> t2_grid, std::size_t max_cells = kDefaultSurfaceCellCap);

}  // namespace qrev
