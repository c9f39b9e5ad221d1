#pragma once

#include <stdexcept>
#include <string>

namespace kninst {

/// Boyer-Lindquist chart breakdown: a required nonzero quantity
/// (Delta_r, Delta_theta, Sigma, or sin(theta)) is below tolerance.
struct ChartFailure : std::runtime_error {
    explicit ChartFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation on the ring singularity locus Sigma = 0.
struct SingularityHit : std::runtime_error {
    explicit SingularityHit(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation at a coordinate pole (sin(theta) = 0) where the requested
/// quantity diverges.
struct PoleEvaluation : std::runtime_error {
    explicit PoleEvaluation(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation on a theta-horizon (Delta_theta = 0) where the requested
/// quantity diverges.
struct ThetaHorizonEvaluation : std::runtime_error {
    explicit ThetaHorizonEvaluation(const std::string& what) : std::runtime_error(what) {}
};

/// The quartic discriminant machinery requires L != 0.
struct QuarticDegenerate : std::runtime_error {
    explicit QuarticDegenerate(const std::string& what) : std::runtime_error(what) {}
};

/// Both Delta_r and Delta_theta are below tolerance, so neither form of the
/// Carter constant is computable.
struct BothHorizons : std::runtime_error {
    explicit BothHorizons(const std::string& what) : std::runtime_error(what) {}
};

/// Requested analysis domain is empty after exclusions.
struct DomainEmpty : std::runtime_error {
    explicit DomainEmpty(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kninst
