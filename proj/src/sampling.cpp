#include "glaeser/sampling.hpp"
#include "glaeser/errors.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace glaeser {

namespace {
constexpr double kRadiusSlack = 1e-9;
}

bool DomainSpec::contains(const Eigen::VectorXd &x) const {
    if (static_cast<std::size_t>(x.size()) != box.size()) return false;
    const std::span<const double> xs(x.data(), x.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        const double slack = 1e-12 * (box[i].second - box[i].first);
        if (x[i] < box[i].first - slack || x[i] > box[i].second + slack) return false;
    }
    return std::all_of(constraints.begin(), constraints.end(), [&](const Comparison &c) { return c.holds(xs); });
}

double DomainSpec::longestSide() const {
    double side = 0.0;
    for (const auto &[lo, hi] : box) side = std::max(side, hi - lo);
    return side;
}

double DomainSpec::diameter() const {
    double d2 = 0.0;
    for (const auto &[lo, hi] : box) d2 += (hi - lo) * (hi - lo);
    return std::sqrt(d2);
}

// ---- PointIndex --------------------------------------------------------------

PointIndex::PointIndex(std::vector<Eigen::VectorXd> points, double cellSize)
    : points_(std::move(points)), cell_(cellSize) {
    const auto &pts = points_;
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[cellOf(pts[i])].push_back(i);
}

PointIndex::Cell PointIndex::cellOf(const Eigen::VectorXd &x) const {
    Cell c(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) c[i] = static_cast<long>(std::floor(x[i] / cell_));
    return c;
}

std::vector<std::size_t> PointIndex::ball(const Eigen::VectorXd &x, double radius) const {
    std::vector<std::size_t> out;
    if (cells_.empty()) return out;
    const double reach = radius * (1.0 + kRadiusSlack);
    const auto n = x.size();
    Cell lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lo[i] = static_cast<long>(std::floor((x[i] - reach) / cell_));
        hi[i] = static_cast<long>(std::floor((x[i] + reach) / cell_));
    }
    Cell c = lo;
    for (;;) {
        auto it = cells_.find(c);
        if (it != cells_.end())
            for (std::size_t j : it->second)
                if ((points_[j] - x).norm() <= reach) out.push_back(j);
        Eigen::Index d = 0;
        while (d < n && ++c[d] > hi[d]) {
            c[d] = lo[d];
            ++d;
        }
        if (d == n) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::size_t> PointIndex::find(const Eigen::VectorXd &x, double tol) const {
    for (std::size_t j : ball(x, tol)) return j;
    return std::nullopt;
}

// ---- SampleSet ---------------------------------------------------------------

SampleSet::SampleSet(DomainSpec domain, int level, double h, std::vector<Eigen::VectorXd> points)
    : domain_(std::move(domain)), level_(level), h_(h), points_(std::move(points)), index_(points_, h) {}

bool SampleSet::ballIsInterior(std::size_t i, double radius) const {
    return ball(points_[i], radius).size() == latticeBallCount(dimension(), radius / h_);
}

std::size_t latticeBallCount(std::size_t n, double radius) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, long>, std::size_t> cache;
    const double reach = radius * (1.0 + kRadiusSlack);
    const long key = std::lround(radius * 1e6);
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find({n, key}); it != cache.end()) return it->second;

    const long m = static_cast<long>(std::floor(reach));
    std::vector<long> k(n, -m);
    std::size_t count = 0;
    for (;;) {
        double r2 = 0.0;
        for (long v : k) r2 += static_cast<double>(v * v);
        if (std::sqrt(r2) <= reach) ++count;
        std::size_t d = 0;
        while (d < n && ++k[d] > m) {
            k[d] = -m;
            ++d;
        }
        if (d == n) break;
    }
    cache[{n, key}] = count;
    return count;
}

SampleSet sampleDomain(const DomainSpec &domain, int level) {
    if (level < 0) throw DimensionMismatch("sampling level must be nonnegative");
    const std::size_t n = domain.dimension();
    if (n == 0) throw DimensionMismatch("domain has no axes");
    for (const auto &[lo, hi] : domain.box)
        if (!(lo < hi)) throw DimensionMismatch("box axis needs lo < hi");

    const double h = domain.longestSide() * std::ldexp(1.0, -level);
    std::vector<long> steps(n);
    for (std::size_t i = 0; i < n; ++i)
        steps[i] = static_cast<long>(std::floor((domain.box[i].second - domain.box[i].first) / h + 1e-9));

    std::vector<Eigen::VectorXd> points;
    std::vector<long> k(n, 0);
    Eigen::VectorXd x(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i) x[i] = domain.box[i].first + static_cast<double>(k[i]) * h;
        if (domain.contains(x)) points.push_back(x);
        // last axis varies fastest
        bool advanced = false;
        for (std::size_t d = n; d-- > 0;) {
            if (++k[d] <= steps[d]) {
                advanced = true;
                break;
            }
            k[d] = 0;
        }
        if (!advanced) break;
    }
    if (points.empty()) throw EmptyDomain();
    return SampleSet(domain, level, h, std::move(points));
}

} // namespace glaeser
