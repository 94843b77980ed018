#ifndef GLAESER_SECTION_HPP
#define GLAESER_SECTION_HPP

// Continuous sections of a stable bundle.
//
// The min-norm field omega and the complementary projector field are
// continuous away from a discontinuity locus U. Off U a section is glued from
// local projections of anchor vectors with sqrt bumps; on U the construction
// recurses on the restricted bundle, and the result is extended by Shepard
// blending and projected back onto the fibers.

#include "glaeser/bundle.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace glaeser {

struct Section {
    std::shared_ptr<const SampleSet> samples;
    std::vector<Eigen::VectorXd> values;
    /// Shepard power used by at() between samples.
    int blendPower = 2;

    std::size_t size() const { return values.size(); }
    /// Stored value at a sample, inverse-distance blend of nearby samples elsewhere.
    Eigen::VectorXd at(const Eigen::VectorXd &x) const;
};

struct CoverBall {
    std::size_t center;  // sample index
    double radius;
    Eigen::VectorXd anchor;
};
using Cover = std::vector<CoverBall>;

/// A subset of a sample set carrying its own samples and spatial index.
struct SampleSubset {
    std::shared_ptr<const SampleSet> parent;
    std::vector<std::size_t> indices;  // ascending
    std::shared_ptr<const SampleSet> own;

    SampleSubset(std::shared_ptr<const SampleSet> parent, std::vector<std::size_t> indices);
    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
    /// The bundle with fibers kept only at the subset samples.
    Bundle restrict(const Bundle &b) const;
};

struct SectionParams {
    /// Oscillation threshold; <= 0 selects it per field from the data.
    double theta = 0.0;
    /// Oscillation radius; <= 0 means 2h.
    double rho = 0.0;
    /// Shepard power; <= 0 means n + 2.
    int blendPower = 0;
    double anchorTol = 1e-8;
    int threads = 1;
};

struct SectionStats {
    int depth = 0;                       // deepest recursion level reached
    std::vector<std::size_t> locusSizes; // |U| per level, outermost first
    std::size_t coverBalls = 0;          // balls used by all glue steps
};

Section omegaField(const Bundle &b);

/// v minus its projection onto the direction space of fiber i.
Eigen::VectorXd pi1Apply(const Bundle &b, std::size_t i, const Eigen::VectorXd &v);

struct LocalSection {
    std::vector<std::size_t> indices;
    std::vector<Eigen::VectorXd> values;
};

/// omega(y) + v - pi1(y) v at the samples of the closed ball B(center, r).
LocalSection localSection(const Bundle &b, std::size_t center, const Eigen::VectorXd &v, double r,
                          double anchorTol = 1e-8);

double bump(const Eigen::VectorXd &center, double r, const Eigen::VectorXd &y);

/// Normalised bump weights of the cover balls at y (zero outside the ball).
std::vector<double> partitionWeights(const SampleSet &samples, const Cover &cover, const Eigen::VectorXd &y);

Section glue(const Bundle &b, const Cover &cover, double anchorTol = 1e-8, int threads = 1);

/// osc[i] = max |v_j - v_i| over samples j with |y_j - y_i| <= rho.
std::vector<double> oscillation(const SampleSet &samples, const std::vector<Eigen::VectorXd> &field, double rho,
                                int threads = 1);
/// Entrywise max-norm variant for matrix fields.
std::vector<double> oscillation(const SampleSet &samples, const std::vector<Eigen::MatrixXd> &field, double rho,
                                int threads = 1);

/// Projector onto the direction space at every sample.
std::vector<Eigen::MatrixXd> projectorField(const Bundle &b);

/// Data-driven threshold max(0.5 max osc, 10 L rho) with L the median
/// nearest-scale slope of the field.
double defaultTheta(const SampleSet &samples, const std::vector<Eigen::VectorXd> &field,
                    const std::vector<double> &osc, double rho);
double defaultTheta(const SampleSet &samples, const std::vector<Eigen::MatrixXd> &field,
                    const std::vector<double> &osc, double rho);

/// Samples where omega or the projector field oscillates above theta
/// (theta <= 0: per-field default).
SampleSubset discontinuityLocus(const Bundle &b, double theta, double rho, int threads = 1);

/// Shepard extension of a section given on `partial.samples` to every sample of `all`.
Section extend(const Section &partial, std::shared_ptr<const SampleSet> all, int p);

Section projectSection(const Bundle &b, const Section &s, int threads = 1);

/// Greedy ball cover anchored at omega: samples in order of fiber dimension,
/// radius halved from the domain diameter until the local section's
/// oscillation at rho stays within theta, never below 2h.
Cover greedyCover(const Bundle &b, double theta, double rho, double anchorTol = 1e-8);

Section buildSection(const Bundle &b, const SectionParams &params, int depth = 0, SectionStats *stats = nullptr);

} // namespace glaeser

#endif
