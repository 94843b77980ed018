#ifndef GLAESER_VERIFY_HPP
#define GLAESER_VERIFY_HPP

// Checks that do not reuse the projection code of affine.hpp: residuals of a
// section, a sampling upper bound for point-to-subspace distances, ray-wise
// limit tests straight from the system, and a sampled continuity modulus.

#include "glaeser/affine.hpp"
#include "glaeser/expr.hpp"
#include "glaeser/sampling.hpp"
#include "glaeser/section.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace glaeser {

struct ResidualReport {
    double maxResidual = 0.0;
    double meanResidual = 0.0;
    Eigen::VectorXd worstPoint;
    std::vector<double> perPoint;
};

/// |A(y) phi(y) - gamma(y)| at every sample of the section.
ResidualReport residual(const SystemSpec &sys, const Section &sec);

/// Smallest |v - w| over random points v of V followed by a compass search
/// from the best one. Never below the true distance up to rounding.
double bruteForceDistance(const Affine &V, const Eigen::VectorXd &w, int trials, std::uint64_t seed = 1);

/// Distance from lambda to {mu : A mu = g}, +inf when inconsistent (rank via
/// complete orthogonal decomposition).
double fiberDistance(const Eigen::MatrixXd &A, const Eigen::VectorXd &g, const Eigen::VectorXd &lambda,
                     double sigmaTol = 1e-9);

/// Unit directions: both signs in 1D, equal angles in 2D, a Fibonacci sphere in
/// 3D and seeded random vectors beyond.
std::vector<Eigen::VectorXd> probeDirections(std::size_t n, int count, std::uint64_t seed = 7);

struct LimitTable {
    std::vector<Eigen::VectorXd> directions;
    std::vector<double> radii;                  // decreasing
    std::vector<std::vector<double>> distance;  // [direction][radius], NaN when off the domain
    bool passed = false;
    /// Largest distance at the smallest radius over the directions.
    double worstFinal = 0.0;
};

struct LimitOptions {
    int directions = 64;
    std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
    double epsFit = 1e-6;
    double sigmaTol = 1e-9;
    /// Rays leaving this domain are cut where they exit.
    const DomainSpec *domain = nullptr;
};

/// Whether dist(lambda, fiber(x0 + rho u)) tends to zero along every ray:
/// it must end below epsFit and never grow by more than a factor 2.
LimitTable directionalLimitOracle(const SystemSpec &sys, const Eigen::VectorXd &x0, const Eigen::VectorXd &lambda,
                                  const LimitOptions &opts = {});

struct ContinuityReport {
    std::vector<double> radii;  // strictly decreasing
    std::vector<double> maxOscillation;
    bool decreasing = false;    // non-increasing as the radius shrinks
};

ContinuityReport modulusOfContinuity(const Section &sec, std::vector<double> radii, int threads = 1);

} // namespace glaeser

#endif
