#ifndef GLAESER_BUNDLE_HPP
#define GLAESER_BUNDLE_HPP

// The affine bundle x -> H_x over a sampled domain and its Glaeser refinements.
//
// Refinement keeps the part of H_x whose distance to the neighbouring fibers
// tends to zero as the neighbour approaches x. On a lattice the limit is read
// off a sequence of punctured shells r_{j+1} < |y - x| <= r_j that contract
// geometrically towards x: the squared distance to the shell fibers is a
// quadratic in the fiber parameter, its per-shell minimisers are extrapolated
// to radius zero, and a candidate is kept only when the shell misfit decays.
//
// After the first pass a fiber can only change where the previous pass changed
// something arbitrarily close by: a sample is re-examined when its own fiber
// changed or when changed samples occupy every one of its shells.

#include "glaeser/affine.hpp"
#include "glaeser/expr.hpp"
#include "glaeser/sampling.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace glaeser {

struct RefineParams {
    double sigmaTol = 1e-9;
    /// Outer shell radius R0; 0 means 8h.
    double shellBaseRadius = 0.0;
    int shellCount = 4;
    double shellRatio = 0.5;
    double epsFit = 1e-6;
    double epsDir = 1e-6;
    /// Unless below epsFit, the inner-shell misfit must be at most
    /// (inner radius / outer radius)^decayExponent times the outer one.
    double decayExponent = 0.5;
    /// 0 means min(max(4, n + 1), 2n).
    int minShellSamples = 0;
    /// 0 means 2s + 2.
    int maxIterations = 0;
    double stabilizationGap = 1e-8;
    /// Worker threads for per-point maps (0 = all cores).
    int threads = 1;

    /// Copy with every "0 = default" field replaced by its value for this sampling.
    RefineParams resolved(double h, std::size_t n, std::size_t s) const;
};

struct Bundle {
    std::shared_ptr<const SampleSet> samples;
    std::vector<Affine> fibers;
    /// Final-shell misfit of the accepted fiber (0 at iteration 0, +inf when emptied).
    std::vector<double> fitError;
    /// Fiber differs from the previous iteration (all true at iteration 0).
    std::vector<char> changed;
    int iteration = 0;
    RefineParams params;

    std::size_t size() const { return fibers.size(); }
    std::size_t unknowns() const { return fibers.empty() ? 0 : static_cast<std::size_t>(fibers.front().ambientDim()); }
    const Eigen::VectorXd &point(std::size_t i) const { return samples->point(i); }
};

std::shared_ptr<const SampleSet> makeSamples(const DomainSpec &domain, int level);

/// Iteration-0 bundle: fibers[i] = solveFiber(A(x_i), gamma(x_i)).
Bundle initialBundle(const SystemSpec &sys, std::shared_ptr<const SampleSet> samples, const RefineParams &params);

struct PointRefinement {
    Affine fiber;
    double fitError;
};

/// One refinement step at sample i (reads b only).
PointRefinement refinePoint(const Bundle &b, std::size_t i);

Bundle refineOnce(const Bundle &b);

struct StabilizeResult {
    Bundle bundle;
    int iterations = 0;
    double lastGap = 0.0;
    /// Stopped because an empty fiber appeared; later refinements stay empty there.
    bool stoppedOnEmpty = false;
};

/// Refines until the largest per-point subspaceGap is <= params.stabilizationGap,
/// or until a fiber becomes empty. Throws NoStabilization after maxIterations.
/// `observer` sees the input bundle and every refinement.
StabilizeResult stabilize(Bundle b, const std::function<void(const Bundle &)> &observer = {});

/// First sample whose fiber is empty.
std::optional<std::size_t> hasEmptyFiber(const Bundle &b);

} // namespace glaeser

#endif
