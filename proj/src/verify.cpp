#include "glaeser/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace glaeser {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ResidualReport residual(const SystemSpec &sys, const Section &sec) {
    ResidualReport r;
    const SampleSet &S = *sec.samples;
    r.perPoint.resize(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        const auto [A, g] = sys.evaluate(S.point(i));
        if (A.cols() != sec.values[i].size()) throw DimensionMismatch("section width differs from unknown count");
        r.perPoint[i] = (A * sec.values[i] - g).norm();
    }
    double sum = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < S.size(); ++i) {
        sum += r.perPoint[i];
        if (r.perPoint[i] > r.perPoint[worst]) worst = i;
    }
    if (!r.perPoint.empty()) {
        r.maxResidual = r.perPoint[worst];
        r.meanResidual = sum / static_cast<double>(S.size());
        r.worstPoint = S.point(worst);
    }
    return r;
}

double bruteForceDistance(const Affine &V, const Eigen::VectorXd &w, int trials, std::uint64_t seed) {
    if (V.isEmpty()) throw EmptySubspace();
    if (trials < 1) throw DimensionMismatch("brute force needs at least one trial");
    const Eigen::MatrixXd &B = V.basis();
    const Eigen::VectorXd &b = V.base();
    const Eigen::Index k = B.cols();
    auto f = [&](const Eigen::VectorXd &t) { return (b + B * t - w).squaredNorm(); };

    Eigen::VectorXd best = Eigen::VectorXd::Zero(k);
    double fbest = f(best);
    if (k == 0) return std::sqrt(fbest);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    double scale = 1.0 + (w - b).norm();
    const int rounds = std::max(1, std::min(trials, 8));
    const int perRound = std::max(1, trials / rounds);
    for (int r = 0; r < rounds; ++r, scale *= 0.25) {
        const Eigen::VectorXd centre = best;
        for (int i = 0; i < perRound; ++i) {
            Eigen::VectorXd t(k);
            for (Eigen::Index j = 0; j < k; ++j) t[j] = centre[j] + scale * gauss(rng);
            if (const double ft = f(t); ft < fbest) {
                fbest = ft;
                best = t;
            }
        }
    }

    // compass search on the coordinate directions
    double step = scale * 4.0;
    const double minStep = 1e-14 * (1.0 + best.norm() + (w - b).norm());
    while (step > minStep) {
        bool improved = false;
        for (Eigen::Index j = 0; j < k; ++j)
            for (double sgn : {1.0, -1.0}) {
                Eigen::VectorXd t = best;
                t[j] += sgn * step;
                if (const double ft = f(t); ft < fbest) {
                    fbest = ft;
                    best = t;
                    improved = true;
                }
            }
        if (!improved) step *= 0.5;
    }
    return std::sqrt(fbest);
}

double fiberDistance(const Eigen::MatrixXd &A, const Eigen::VectorXd &g, const Eigen::VectorXd &lambda,
                     double sigmaTol) {
    if (A.rows() != g.size() || A.cols() != lambda.size()) throw DimensionMismatch("fiber distance operand sizes");
    if (A.rows() == 0) return 0.0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(sigmaTol);
    cod.compute(A);
    const Eigen::VectorXd x = cod.solve(g);
    if ((A * x - g).norm() > sigmaTol * (1.0 + g.norm()) * 10.0) return kInf;
    return cod.solve(A * lambda - g).norm();
}

std::vector<Eigen::VectorXd> probeDirections(std::size_t n, int count, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> dirs;
    if (n == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * std::numbers::pi * i / count;
            dirs.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
        }
    } else if (n == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double rr = std::sqrt(1.0 - z * z);
            dirs.push_back(Eigen::Vector3d(rr * std::cos(golden * i), rr * std::sin(golden * i), z));
        }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        for (int i = 0; i < count; ++i) {
            Eigen::VectorXd u(static_cast<Eigen::Index>(n));
            do {
                for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = gauss(rng);
            } while (u.norm() < 1e-12);
            dirs.push_back(u.normalized());
        }
    }
    return dirs;
}

LimitTable directionalLimitOracle(const SystemSpec &sys, const Eigen::VectorXd &x0, const Eigen::VectorXd &lambda,
                                  const LimitOptions &opts) {
    LimitTable t;
    t.directions = probeDirections(sys.dimension(), opts.directions);
    t.radii = opts.radii;
    std::sort(t.radii.begin(), t.radii.end(), std::greater<>());
    t.passed = true;
    for (const Eigen::VectorXd &u : t.directions) {
        std::vector<double> row;
        double prev = kInf, last = std::numeric_limits<double>::quiet_NaN();
        bool ok = true;
        for (double rho : t.radii) {
            const Eigen::VectorXd y = x0 + rho * u;
            if (opts.domain && !opts.domain->contains(y)) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            const auto [A, g] = sys.evaluate(y);
            const double d = fiberDistance(A, g, lambda, opts.sigmaTol);
            row.push_back(d);
            if (d > 2.0 * prev && d > opts.epsFit) ok = false;
            prev = d;
            last = d;
        }
        if (!std::isnan(last)) {
            if (!(last <= opts.epsFit)) ok = false;
            t.worstFinal = std::max(t.worstFinal, last);
        }
        t.passed = t.passed && ok;
        t.distance.push_back(std::move(row));
    }
    return t;
}

ContinuityReport modulusOfContinuity(const Section &sec, std::vector<double> radii, int threads) {
    std::sort(radii.begin(), radii.end(), std::greater<>());
    if (std::adjacent_find(radii.begin(), radii.end()) != radii.end())
        throw DimensionMismatch("continuity radii must be distinct");
    ContinuityReport r;
    r.radii = radii;
    for (double rho : radii) {
        const auto osc = oscillation(*sec.samples, sec.values, rho, threads);
        r.maxOscillation.push_back(osc.empty() ? 0.0 : *std::max_element(osc.begin(), osc.end()));
    }
    r.decreasing = true;
    for (std::size_t k = 1; k < r.maxOscillation.size(); ++k)
        if (r.maxOscillation[k] > r.maxOscillation[k - 1]) r.decreasing = false;
    return r;
}

} // namespace glaeser
