#pragma once

#include <stdexcept>
#include <string>

namespace kerrshg {

/// Argument outside the mathematical domain of an operation (negative photon
/// number, non-positive loss ratio, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A noise spectrum was requested at a fixed point that is not strictly
/// stable, i.e. at or above the Hopf point where linearization breaks down.
class UnstableSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Resolvent inversion failed (only reachable at a marginal point).
class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Monte Carlo controls cannot resolve the dynamics of the system at hand.
class ConfigTooCoarse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace kerrshg
