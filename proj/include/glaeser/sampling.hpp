#ifndef GLAESER_SAMPLING_HPP
#define GLAESER_SAMPLING_HPP

#include "glaeser/expr.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace glaeser {

/// Q = box ∩ {all constraints hold}.
struct DomainSpec {
    std::vector<std::pair<double, double>> box;
    std::vector<Comparison> constraints;

    std::size_t dimension() const { return box.size(); }
    bool contains(const Eigen::VectorXd &x) const;
    double longestSide() const;
    double diameter() const;
};

/// Uniform hashed cell grid over a point list answering closed-ball range queries.
class PointIndex {
public:
    PointIndex() = default;
    PointIndex(std::vector<Eigen::VectorXd> points, double cellSize);

    /// Indices (ascending) of points p with |p - x| <= radius (up to a relative 1e-9).
    std::vector<std::size_t> ball(const Eigen::VectorXd &x, double radius) const;
    /// Index of a stored point within `tol` of x, if any.
    std::optional<std::size_t> find(const Eigen::VectorXd &x, double tol) const;

private:
    using Cell = std::vector<long>;
    Cell cellOf(const Eigen::VectorXd &x) const;

    std::vector<Eigen::VectorXd> points_;
    double cell_ = 1.0;
    std::map<Cell, std::vector<std::size_t>> cells_;
};

/// Lattice samples of a domain at pitch h = longest box side * 2^-level.
class SampleSet {
public:
    SampleSet(DomainSpec domain, int level, double h, std::vector<Eigen::VectorXd> points);

    const DomainSpec &domain() const { return domain_; }
    int level() const { return level_; }
    double spacing() const { return h_; }
    std::size_t size() const { return points_.size(); }
    std::size_t dimension() const { return domain_.dimension(); }
    const Eigen::VectorXd &point(std::size_t i) const { return points_[i]; }
    const std::vector<Eigen::VectorXd> &points() const { return points_; }

    std::vector<std::size_t> ball(const Eigen::VectorXd &x, double radius) const { return index_.ball(x, radius); }
    std::optional<std::size_t> find(const Eigen::VectorXd &x) const { return index_.find(x, 1e-9 * h_); }

    /// True when every lattice point of the closed ball B(x, radius) is a sample,
    /// i.e. neither the box nor a constraint truncates the ball.
    bool ballIsInterior(std::size_t i, double radius) const;

private:
    DomainSpec domain_;
    int level_;
    double h_;
    std::vector<Eigen::VectorXd> points_;
    PointIndex index_;
};

SampleSet sampleDomain(const DomainSpec &domain, int level);

/// Number of integer vectors in Z^n with norm <= radius.
std::size_t latticeBallCount(std::size_t n, double radius);

} // namespace glaeser

#endif
