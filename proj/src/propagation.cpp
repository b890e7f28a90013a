#include "qrev/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace qrev {

namespace {

void require_matching(const StateVector& psi, const linalg::Eigensystem& h) {
    if (psi.size() != h.values.size()) {
        throw std::invalid_argument("state dimension " + std::to_string(psi.size()) +
                                    " does not match Hamiltonian dimension " + std::to_string(h.values.size()));
    }
}

// exp(-i lambda t / hbar) elementwise
Eigen::VectorXcd phases(const Eigen::VectorXd& lambda, double t, double hbar) {
    Eigen::VectorXcd out(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) out[k] = std::polar(1.0, -lambda[k] * t / hbar);
    return out;
}

Eigen::VectorXcd to_eigenbasis(const linalg::Eigensystem& h, const StateVector& psi) {
    return h.vectors.transpose() * psi;
}

void require_ascending(std::span<const double> grid, const char* what) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly ascending");
    }
}

}  // namespace

linalg::Eigensystem window_eigensystem(const QuantizedModel& model, double dx) {
    const Eigen::VectorXd e = model.window_energies();
    if (dx == 0.0) {
        return {e, Eigen::MatrixXd::Identity(e.size(), e.size())};
    }
    Eigen::MatrixXd h = dx * model.b_matrix;
    h.diagonal() += e;
    return linalg::symmetric_eigen(h);
}

EvolutionPair make_evolution_pair(const QuantizedModel& model, double epsilon_evol) {
    EvolutionPair pair;
    pair.h1 = window_eigensystem(model, epsilon_evol);
    pair.h2 = epsilon_evol == 0.0 ? pair.h1 : window_eigensystem(model, -epsilon_evol);
    pair.epsilon_evol = epsilon_evol;
    pair.hbar = model.hbar();
    return pair;
}

EvolutionPair make_evolution_pair(const Eigen::MatrixXd& h1, const Eigen::MatrixXd& h2, double hbar) {
    EvolutionPair pair;
    pair.h1 = linalg::symmetric_eigen(h1);
    pair.h2 = linalg::symmetric_eigen(h2);
    pair.hbar = hbar;
    return pair;
}

StateVector evolve(const StateVector& psi, const linalg::Eigensystem& h, double t, double hbar) {
    require_matching(psi, h);
    if (t == 0.0) return psi;
    const Eigen::VectorXcd c = to_eigenbasis(h, psi).cwiseProduct(phases(h.values, t, hbar));
    return h.vectors * c;
}

double return_probability(const StateVector& psi, const EvolutionPair& pair, double t1, double t2) {
    const StateVector forward = evolve(psi, pair.h1, t1, pair.hbar);
    const StateVector back = evolve(forward, pair.h2, -t2, pair.hbar);
    return std::norm(psi.dot(back));
}

std::vector<double> survival_trace(const StateVector& psi, const linalg::Eigensystem& h, double hbar,
                                   std::span<const double> times) {
    require_matching(psi, h);
    const Eigen::VectorXcd c = to_eigenbasis(h, psi);
    const Eigen::VectorXd w = c.cwiseAbs2();
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        cplx amp = 0.0;
        for (Eigen::Index k = 0; k < w.size(); ++k) amp += w[k] * std::polar(1.0, -h.values[k] * t / hbar);
        out.push_back(std::norm(amp));
    }
    return out;
}

std::vector<double> fidelity_trace(const StateVector& psi, const EvolutionPair& pair, std::span<const double> times) {
    require_matching(psi, pair.h1);
    require_matching(psi, pair.h2);
    // <psi|U2(t)^-1 U1(t)|psi> = b^dag e^{+i L2 t} (V2^T V1) e^{-i L1 t} a
    const Eigen::VectorXcd a = to_eigenbasis(pair.h1, psi);
    const Eigen::VectorXcd b = to_eigenbasis(pair.h2, psi);
    const Eigen::MatrixXd overlap = pair.h2.vectors.transpose() * pair.h1.vectors;
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        const Eigen::VectorXcd g = overlap * a.cwiseProduct(phases(pair.h1.values, t, pair.hbar));
        const Eigen::VectorXcd f = b.cwiseProduct(phases(pair.h2.values, t, pair.hbar));
        out.push_back(std::norm(f.dot(g)));
    }
    return out;
}

std::vector<double> uniform_grid(double period, std::size_t n_samples) {
    if (!(period > 0.0)) throw std::invalid_argument("uniform_grid: period must be positive");
    if (n_samples < 2 || n_samples % 2 != 0) throw std::invalid_argument("uniform_grid: n_samples must be even and >= 2");
    std::vector<double> t(n_samples + 1);
    const double half = 0.5 * period;
    const std::size_t m = n_samples / 2;
    for (std::size_t k = 0; k <= m; ++k) t[k] = half * static_cast<double>(k) / static_cast<double>(m);
    for (std::size_t k = 1; k <= m; ++k) t[m + k] = half + half * static_cast<double>(k) / static_cast<double>(m);
    t[m] = half;
    t[n_samples] = period;
    return t;
}

EchoTrace echo_trace(const StateVector& psi, const EvolutionPair& pair, double period, std::size_t n_samples) {
    require_matching(psi, pair.h1);
    require_matching(psi, pair.h2);
    EchoTrace trace;
    trace.period = period;
    trace.times = uniform_grid(period, n_samples);
    trace.reversal_index = n_samples / 2;
    const double half = trace.times[trace.reversal_index];

    std::span<const double> forward_times(trace.times.data(), trace.reversal_index + 1);
    trace.p = survival_trace(psi, pair.h1, pair.hbar, forward_times);

    // reversed leg: <psi| U2(s)^-1 |phi> with phi = U1(T/2) psi computed once
    const StateVector phi = evolve(psi, pair.h1, half, pair.hbar);
    const Eigen::VectorXcd d = to_eigenbasis(pair.h2, psi);
    const Eigen::VectorXcd f = to_eigenbasis(pair.h2, phi);
    const Eigen::VectorXcd df = d.conjugate().cwiseProduct(f);
    trace.p.reserve(trace.times.size());
    for (std::size_t i = trace.reversal_index + 1; i < trace.times.size(); ++i) {
        const double s = trace.times[i] - half;
        cplx amp = 0.0;
        for (Eigen::Index k = 0; k < df.size(); ++k) amp += df[k] * std::polar(1.0, pair.h2.values[k] * s / pair.hbar);
        trace.p.push_back(std::norm(amp));
    }
    return trace;
}

Eigen::MatrixXd surface(const StateVector& psi, const EvolutionPair& pair, std::span<const double> t1_grid,
                        std::span<const double> t2_grid, std::size_t max_cells) {
    require_matching(psi, pair.h1);
    require_matching(psi, pair.h2);
    require_ascending(t1_grid, "surface: t1 grid");
    require_ascending(t2_grid, "surface: t2 grid");
    if (t1_grid.size() * t2_grid.size() > max_cells) {
        throw std::invalid_argument("surface: " + std::to_string(t1_grid.size()) + " x " +
                                    std::to_string(t2_grid.size()) + " grid exceeds the cap of " +
                                    std::to_string(max_cells) + " cells");
    }
    // row i: g = V2^T V1 e^{-i L1 t1} V1^T psi, then P = |sum conj(d_k) e^{+i L2_k t2} g_k|^2
    const Eigen::VectorXcd a = to_eigenbasis(pair.h1, psi);
    const Eigen::VectorXcd d = to_eigenbasis(pair.h2, psi).conjugate();
    const Eigen::MatrixXd overlap = pair.h2.vectors.transpose() * pair.h1.vectors;
    const auto n1 = static_cast<Eigen::Index>(t1_grid.size());
    const auto n2 = static_cast<Eigen::Index>(t2_grid.size());
    Eigen::MatrixXcd back(d.size(), n2);
    for (Eigen::Index j = 0; j < n2; ++j) {
        back.col(j) = d.cwiseProduct(phases(pair.h2.values, -t2_grid[static_cast<std::size_t>(j)], pair.hbar));
    }
    Eigen::MatrixXd out(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i) {
        const Eigen::VectorXcd g = overlap * a.cwiseProduct(phases(pair.h1.values, t1_grid[static_cast<std::size_t>(i)], pair.hbar));
        out.row(i) = (back.transpose() * g).cwiseAbs2().transpose();
    }
    return out;
}

}  // namespace qrev
