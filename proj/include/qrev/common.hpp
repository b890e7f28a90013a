#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qrev {

using cplx = std::complex<double>;

/// Amplitudes in the eigenbasis of the reference Hamiltonian, restricted to
/// the retained energy window.
using StateVector = Eigen::VectorXcd;

inline constexpr std::string_view kCodeVersion = "0.1.0";

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: invalid parameters, unreadable or malformed config.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Eigensolver failure, unconverged preparation, truncation problems.
class NumericalError : public Error {
public:
    using Error::Error;
};

enum class ModelKind { physical_2dw, ermt };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view text);

/// Symmetry class of the two-mode oscillator basis. The 2D well is invariant
/// under Q1 -> -Q1, Q2 -> -Q2 and Q1 <-> Q2, so each class evolves independently.
enum class Sector {
    full,
    even_even_sym,
    even_even_anti,
    odd_odd_sym,
    odd_odd_anti,
    even_odd,
};

std::string_view to_string(Sector sector);
Sector sector_from_string(std::string_view text);

/// Inclusive index range into an ascending spectrum.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;

    [[nodiscard]] std::size_t size() const { return last - first + 1; }
    [[nodiscard]] bool contains(std::size_t i) const { return i >= first && i <= last; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

}  // namespace qrev
