#include "glaeser/section.hpp"
#include "glaeser/errors.hpp"
#include "glaeser/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glaeser {

namespace {

constexpr double kThetaFloor = 1e-9;

std::vector<double> toStd(const Eigen::VectorXd &x) { return {x.data(), x.data() + x.size()}; }

void requireNonempty(const Bundle &b, std::size_t i) {
    if (b.fibers[i].isEmpty()) throw EmptyFiber(i, toStd(b.point(i)));
}

void requireNoEmpty(const Bundle &b) {
    if (auto w = hasEmptyFiber(b)) throw EmptyFiber(*w, toStd(b.point(*w)));
}

double vecNorm(const Eigen::VectorXd &v) { return v.norm(); }
double matNorm(const Eigen::MatrixXd &m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

template <typename T, typename Norm>
std::vector<double> oscillationImpl(const SampleSet &S, const std::vector<T> &field, double rho, int threads,
                                    Norm norm) {
    if (field.size() != S.size()) throw DimensionMismatch("field size differs from sample count");
    std::vector<double> osc(S.size(), 0.0);
    parallelFor(S.size(), threads, [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t j : S.ball(S.point(i), rho)) m = std::max(m, norm(field[j] - field[i]));
        osc[i] = m;
    });
    return osc;
}

template <typename T, typename Norm>
double thetaImpl(const SampleSet &S, const std::vector<T> &field, const std::vector<double> &osc, double rho,
                 Norm norm) {
    double maxOsc = 0.0, scale = 0.0;
    for (double o : osc) maxOsc = std::max(maxOsc, o);
    for (const auto &v : field) scale = std::max(scale, norm(v));
    std::vector<double> slopes;
    for (std::size_t i = 0; i < S.size(); ++i) {
        double best = -1.0;
        for (std::size_t j : S.ball(S.point(i), rho)) {
            if (j == i) continue;
            best = std::max(best, norm(field[j] - field[i]) / (S.point(j) - S.point(i)).norm());
        }
        if (best >= 0.0) slopes.push_back(best);
    }
    double lip = 0.0;
    if (!slopes.empty()) {
        auto mid = slopes.begin() + static_cast<std::ptrdiff_t>(slopes.size() / 2);
        std::nth_element(slopes.begin(), mid, slopes.end());
        lip = *mid;
    }
    return std::max({0.5 * maxOsc, 10.0 * lip * rho, kThetaFloor * (1.0 + scale)});
}

/// Largest rho-oscillation of a local section restricted to its own ball.
double localOscillation(const SampleSet &S, const LocalSection &loc, double rho) {
    std::vector<long> slot(S.size(), -1);
    for (std::size_t m = 0; m < loc.indices.size(); ++m) slot[loc.indices[m]] = static_cast<long>(m);
    double worst = 0.0;
    for (std::size_t m = 0; m < loc.indices.size(); ++m)
        for (std::size_t j : S.ball(S.point(loc.indices[m]), rho))
            if (slot[j] >= 0) worst = std::max(worst, (loc.values[slot[j]] - loc.values[m]).norm());
    return worst;
}

bool isolated(const SampleSet &S, double rho) {
    for (std::size_t i = 0; i < S.size(); ++i)
        if (S.ball(S.point(i), rho).size() > 1) return false;
    return true;
}

} // namespace

// ---- Section ---------------------------------------------------------------

Eigen::VectorXd Section::at(const Eigen::VectorXd &x) const {
    if (auto i = samples->find(x)) return values[*i];
    auto near = samples->ball(x, 2.0 * samples->spacing());
    if (near.empty()) {
        near.resize(samples->size());
        std::iota(near.begin(), near.end(), std::size_t{0});
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(values.front().size());
    double wsum = 0.0;
    for (std::size_t j : near) {
        const double w = std::pow((samples->point(j) - x).norm(), -blendPower);
        acc += w * values[j];
        wsum += w;
    }
    return acc / wsum;
}

// ---- SampleSubset ------------------------------------------------------------

SampleSubset::SampleSubset(std::shared_ptr<const SampleSet> parentSet, std::vector<std::size_t> idx)
    : parent(std::move(parentSet)), indices(std::move(idx)) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw DimensionMismatch("subset indices must be distinct");
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= parent->size()) throw DimensionMismatch("subset index out of range");
        pts.push_back(parent->point(i));
    }
    own = std::make_shared<const SampleSet>(parent->domain(), parent->level(), parent->spacing(), std::move(pts));
}

Bundle SampleSubset::restrict(const Bundle &b) const {
    if (b.size() != parent->size())
        throw DimensionMismatch("bundle is not defined on the subset's parent samples");
    Bundle r;
    r.samples = own;
    r.params = b.params;
    r.iteration = b.iteration;
    for (std::size_t i : indices) {
        r.fibers.push_back(b.fibers[i]);
        r.fitError.push_back(b.fitError[i]);
        r.changed.push_back(b.changed.empty() ? 0 : b.changed[i]);
    }
    return r;
}

// ---- fields ------------------------------------------------------------------

Section omegaField(const Bundle &b) {
    requireNoEmpty(b);
    Section s;
    s.samples = b.samples;
    s.blendPower = static_cast<int>(b.samples->dimension()) + 2;
    s.values.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) s.values[i] = minNormPoint(b.fibers[i]);
    return s;
}

Eigen::VectorXd pi1Apply(const Bundle &b, std::size_t i, const Eigen::VectorXd &v) {
    requireNonempty(b, i);
    const Eigen::MatrixXd &B = b.fibers[i].basis();
    return v - B * (B.transpose() * v);
}

std::vector<Eigen::MatrixXd> projectorField(const Bundle &b) {
    requireNoEmpty(b);
    std::vector<Eigen::MatrixXd> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = projectorMatrix(b.fibers[i]);
    return out;
}

LocalSection localSection(const Bundle &b, std::size_t center, const Eigen::VectorXd &v, double r,
                          double anchorTol) {
    requireNonempty(b, center);
    const double off = distance(b.fibers[center], v);
    if (!(off <= anchorTol)) throw AnchorNotInFiber(center, off);
    LocalSection loc;
    loc.indices = b.samples->ball(b.point(center), r);
    loc.values.reserve(loc.indices.size());
    for (std::size_t y : loc.indices) {
        requireNonempty(b, y);
        loc.values.push_back(minNormPoint(b.fibers[y]) + v - pi1Apply(b, y, v));
    }
    return loc;
}

double bump(const Eigen::VectorXd &center, double r, const Eigen::VectorXd &y) {
    const double d2 = (y - center).squaredNorm();
    return d2 < r * r ? std::sqrt(r * r - d2) : 0.0;
}

std::vector<double> partitionWeights(const SampleSet &samples, const Cover &cover, const Eigen::VectorXd &y) {
    std::vector<double> w(cover.size());
    double total = 0.0;
    for (std::size_t j = 0; j < cover.size(); ++j) total += w[j] = bump(samples.point(cover[j].center), cover[j].radius, y);
    if (total > 0.0)
        for (double &x : w) x /= total;
    return w;
}

Section glue(const Bundle &b, const Cover &cover, double anchorTol, int threads) {
    requireNoEmpty(b);
    for (const CoverBall &ball : cover) {
        if (!(ball.radius > 0.0)) throw DimensionMismatch("cover radii must be positive");
        const double off = distance(b.fibers[ball.center], ball.anchor);
        if (!(off <= anchorTol)) throw AnchorNotInFiber(ball.center, off);
    }
    const SampleSet &S = *b.samples;
    Section s;
    s.samples = b.samples;
    s.blendPower = static_cast<int>(S.dimension()) + 2;
    s.values.resize(b.size());
    parallelFor(b.size(), threads, [&](std::size_t y) {
        const auto w = partitionWeights(S, cover, S.point(y));
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.unknowns()));
        bool covered = false;
        for (std::size_t j = 0; j < cover.size(); ++j) {
            if (w[j] <= 0.0) continue;
            covered = true;
            const Eigen::VectorXd &v = cover[j].anchor;
            acc += w[j] * (minNormPoint(b.fibers[y]) + v - pi1Apply(b, y, v));
        }
        if (!covered) throw UncoveredSample(y);
        s.values[y] = acc;
    });
    return s;
}

std::vector<double> oscillation(const SampleSet &samples, const std::vector<Eigen::VectorXd> &field, double rho,
                                int threads) {
    return oscillationImpl(samples, field, rho, threads, vecNorm);
}

std::vector<double> oscillation(const SampleSet &samples, const std::vector<Eigen::MatrixXd> &field, double rho,
                                int threads) {
    return oscillationImpl(samples, field, rho, threads, matNorm);
}

double defaultTheta(const SampleSet &samples, const std::vector<Eigen::VectorXd> &field,
                    const std::vector<double> &osc, double rho) {
    return thetaImpl(samples, field, osc, rho, vecNorm);
}

double defaultTheta(const SampleSet &samples, const std::vector<Eigen::MatrixXd> &field,
                    const std::vector<double> &osc, double rho) {
    return thetaImpl(samples, field, osc, rho, matNorm);
}

SampleSubset discontinuityLocus(const Bundle &b, double theta, double rho, int threads) {
    const SampleSet &S = *b.samples;
    const auto omega = omegaField(b).values;
    const auto proj = projectorField(b);
    const auto oscW = oscillation(S, omega, rho, threads);
    const auto oscP = oscillation(S, proj, rho, threads);
    const double tW = theta > 0.0 ? theta : defaultTheta(S, omega, oscW, rho);
    const double tP = theta > 0.0 ? theta : defaultTheta(S, proj, oscP, rho);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (oscW[i] > tW || oscP[i] > tP) idx.push_back(i);
    return SampleSubset(b.samples, std::move(idx));
}

Section extend(const Section &partial, std::shared_ptr<const SampleSet> all, int p) {
    if (partial.values.empty()) throw EmptySubset();
    const SampleSet &U = *partial.samples;
    Section s;
    s.samples = all;
    s.blendPower = p;
    s.values.resize(all->size());
    for (std::size_t y = 0; y < all->size(); ++y) {
        const Eigen::VectorXd &x = all->point(y);
        if (auto u = U.find(x)) {
            s.values[y] = partial.values[*u];
            continue;
        }
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(partial.values.front().size());
        double wsum = 0.0;
        for (std::size_t u = 0; u < U.size(); ++u) {
            const double w = std::pow((U.point(u) - x).norm(), -p);
            acc += w * partial.values[u];
            wsum += w;
        }
        s.values[y] = acc / wsum;
    }
    return s;
}

Section projectSection(const Bundle &b, const Section &s, int threads) {
    requireNoEmpty(b);
    if (s.values.size() != b.size()) throw DimensionMismatch("section size differs from bundle size");
    Section out;
    out.samples = b.samples;
    out.blendPower = s.blendPower;
    out.values.resize(b.size());
    parallelFor(b.size(), threads, [&](std::size_t y) {
        out.values[y] = minNormPoint(b.fibers[y]) + s.values[y] - pi1Apply(b, y, s.values[y]);
    });
    return out;
}

Cover greedyCover(const Bundle &b, double theta, double rho, double anchorTol) {
    requireNoEmpty(b);
    const SampleSet &S = *b.samples;
    const double floorRadius = 2.0 * S.spacing();
    std::vector<std::size_t> order(S.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return b.fibers[a].dim() < b.fibers[c].dim(); });

    Cover cover;
    std::vector<char> covered(S.size(), 0);
    for (std::size_t c : order) {
        if (covered[c]) continue;
        const Eigen::VectorXd anchor = minNormPoint(b.fibers[c]);
        double r = std::max(S.domain().diameter(), floorRadius);
        LocalSection loc = localSection(b, c, anchor, r, anchorTol);
        while (r > floorRadius && localOscillation(S, loc, rho) > theta) {
            r = std::max(0.5 * r, floorRadius);
            loc = localSection(b, c, anchor, r, anchorTol);
        }
        // bumps vanish on the sphere, so only the open ball counts as covered
        for (std::size_t y : loc.indices)
            if (bump(S.point(c), r, S.point(y)) > 0.0) covered[y] = 1;
        cover.push_back({c, r, anchor});
    }
    return cover;
}

Section buildSection(const Bundle &b, const SectionParams &params, int depth, SectionStats *stats) {
    const SampleSet &S = *b.samples;
    const int n = static_cast<int>(S.dimension());
    if (depth > n) throw RecursionLimit(depth);
    requireNoEmpty(b);
    const double rho = params.rho > 0.0 ? params.rho : 2.0 * S.spacing();
    const int p = params.blendPower > 0 ? params.blendPower : n + 2;
    if (stats) stats->depth = std::max(stats->depth, depth);

    if (isolated(S, rho)) {
        Section s = omegaField(b);
        s.blendPower = p;
        return s;
    }

    const SampleSubset U = discontinuityLocus(b, params.theta, rho, params.threads);
    if (stats) stats->locusSizes.push_back(U.size());

    if (!U.empty() && U.size() < S.size() && depth < n) {
        const Bundle sub = U.restrict(b);
        const Section onU = buildSection(sub, params, depth + 1, stats);
        Section s = projectSection(b, extend(onU, b.samples, p), params.threads);
        s.blendPower = p;
        return s;
    }

    const auto omega = omegaField(b).values;
    const double theta =
        params.theta > 0.0 ? params.theta : defaultTheta(S, omega, oscillation(S, omega, rho, params.threads), rho);
    const Cover cover = greedyCover(b, theta, rho, params.anchorTol);
    if (stats) stats->coverBalls += cover.size();
    Section s = glue(b, cover, params.anchorTol, params.threads);
    s.blendPower = p;
    return s;
}

} // namespace glaeser
