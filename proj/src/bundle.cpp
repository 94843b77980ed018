#include "glaeser/bundle.hpp"
#include "glaeser/errors.hpp"
#include "glaeser/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glaeser {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShellSlack = 1e-9;
constexpr double kPinvTol = 1e-12;

struct Shell {
    std::size_t count = 0;
    double radiusSum = 0.0;
    Eigen::MatrixXd M;  // Hessian of the mean squared distance in fiber coordinates
    Eigen::VectorXd c;  // half gradient at t = 0
    double e = 0.0;     // value at t = 0

    double meanRadius() const { return radiusSum / static_cast<double>(count); }
    double value(const Eigen::VectorXd &t) const {
        return std::max(0.0, t.dot(M * t) / count + 2.0 * c.dot(t) / count + e / count);
    }
};

/// argmin over t in span(C) of t'Mt + 2c't, minimum-norm.
Eigen::VectorXd restrictedMinimizer(const Eigen::MatrixXd &M, const Eigen::VectorXd &c, const Eigen::MatrixXd &C) {
    if (C.cols() == 0) return Eigen::VectorXd::Zero(M.rows());
    const Eigen::MatrixXd H = C.transpose() * M * C;
    const Eigen::VectorXd g = C.transpose() * c;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const auto &mu = es.eigenvalues();
    const double top = mu.cwiseAbs().maxCoeff();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(H.rows());
    if (top > 0.0)
        for (Eigen::Index i = 0; i < mu.size(); ++i)
            if (mu(i) > kPinvTol * top) z -= (es.eigenvectors().col(i).dot(g) / mu(i)) * es.eigenvectors().col(i);
    return C * z;
}

/// Misfit sequence (outer shell first) must not grow by more than a factor 2
/// and must end below epsFit or below `factor` times its first value.
bool decays(const std::vector<double> &a, double factor, const RefineParams &p) {
    for (std::size_t j = 1; j < a.size(); ++j)
        if (a[j] > 2.0 * a[j - 1] && a[j] > p.epsFit) return false;
    const double last = a.back();
    return last <= p.epsFit || last <= factor * a.front();
}

/// Fits t = a + b * rho through the points by least squares and returns a.
Eigen::VectorXd extrapolateToZero(const std::vector<double> &rho, const std::vector<Eigen::VectorXd> &t) {
    const double m = static_cast<double>(rho.size());
    double s1 = 0.0, s2 = 0.0;
    for (double r : rho) {
        s1 += r;
        s2 += r * r;
    }
    const double det = m * s2 - s1 * s1;
    if (rho.size() < 2 || det <= 1e-12 * s2 * m) return t.front();
    Eigen::VectorXd st = Eigen::VectorXd::Zero(t.front().size()), srt = st;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        st += t[i];
        srt += rho[i] * t[i];
    }
    return (s2 * st - s1 * srt) / det;
}

} // namespace

RefineParams RefineParams::resolved(double h, std::size_t n, std::size_t s) const {
    RefineParams p = *this;
    if (p.shellBaseRadius <= 0.0) p.shellBaseRadius = 8.0 * h;
    if (p.minShellSamples <= 0)
        p.minShellSamples = static_cast<int>(std::min<std::size_t>(std::max<std::size_t>(4, n + 1), 2 * n));
    if (p.maxIterations <= 0) p.maxIterations = static_cast<int>(2 * s + 2);
    if (p.shellCount < 1 || !(p.shellRatio > 0.0 && p.shellRatio < 1.0) || !(p.epsFit > 0.0) ||
        !(p.epsDir > 0.0) || !(p.sigmaTol > 0.0) || !(p.decayExponent > 0.0))
        throw DimensionMismatch("refinement parameters must be positive (shell ratio in (0,1))");
    return p;
}

std::shared_ptr<const SampleSet> makeSamples(const DomainSpec &domain, int level) {
    return std::make_shared<const SampleSet>(sampleDomain(domain, level));
}

Bundle initialBundle(const SystemSpec &sys, std::shared_ptr<const SampleSet> samples, const RefineParams &params) {
    if (sys.dimension() != samples->dimension())
        throw DimensionMismatch("system variables differ from domain dimension");
    Bundle b;
    b.params = params.resolved(samples->spacing(), samples->dimension(), sys.cols);
    b.fibers.assign(samples->size(), Affine::empty(static_cast<Eigen::Index>(sys.cols)));
    b.fitError.assign(samples->size(), 0.0);
    b.changed.assign(samples->size(), 1);
    parallelFor(samples->size(), b.params.threads, [&](std::size_t i) {
        const auto [A, g] = sys.evaluate(samples->point(i));
        b.fibers[i] = solveFiber(A, g, b.params.sigmaTol);
    });
    b.samples = std::move(samples);
    return b;
}

PointRefinement refinePoint(const Bundle &b, std::size_t i) {
    const Affine &V = b.fibers[i];
    if (V.isEmpty()) return {V, kInf};
    const RefineParams &p = b.params;
    const SampleSet &S = *b.samples;
    const Eigen::VectorXd &x = S.point(i);
    const Eigen::Index k = V.dim();
    const Eigen::MatrixXd &B = V.basis();
    const Eigen::VectorXd &base = V.base();

    const int J = p.shellCount;
    std::vector<double> radius(J + 1);
    for (int j = 0; j <= J; ++j) radius[j] = p.shellBaseRadius * std::pow(p.shellRatio, j);

    std::vector<Shell> shells(J);
    std::vector<char> shellSawChange(J, 0);
    for (auto &sh : shells) {
        sh.M = Eigen::MatrixXd::Zero(k, k);
        sh.c = Eigen::VectorXd::Zero(k);
    }

    for (std::size_t y : S.ball(x, radius[0])) {
        if (y == i) continue;
        const double d = (S.point(y) - x).norm();
        int j = -1;
        for (int m = 0; m < J; ++m)
            if (d <= radius[m] * (1.0 + kShellSlack) && d > radius[m + 1] * (1.0 + kShellSlack)) {
                j = m;
                break;
            }
        if (j < 0) continue;
        if (b.changed[y]) shellSawChange[j] = 1;
        const Affine &W = b.fibers[y];
        // dist(lambda, empty) = +inf cannot tend to zero
        if (W.isEmpty()) return {Affine::empty(V.ambientDim()), kInf};

        const Eigen::MatrixXd &BW = W.basis();
        const Eigen::VectorXd off = base - W.base();
        const Eigen::VectorXd dvec = off - BW * (BW.transpose() * off);
        Shell &sh = shells[j];
        if (k > 0) {
            const Eigen::MatrixXd G = B - BW * (BW.transpose() * B);
            sh.M.noalias() += G.transpose() * G;
            sh.c.noalias() += G.transpose() * dvec;
        }
        sh.e += dvec.squaredNorm();
        sh.radiusSum += d;
        ++sh.count;
    }

    std::vector<int> active;  // outer to inner
    for (int j = 0; j < J; ++j) {
        if (shells[j].count < static_cast<std::size_t>(p.minShellSamples) && S.ballIsInterior(i, radius[j]))
            throw InsufficientSamples(i, j, shells[j].count);
        if (shells[j].count > 0) active.push_back(j);
    }
    if (active.empty()) return {V, 0.0};
    if (!b.changed[i] && std::any_of(active.begin(), active.end(), [&](int j) { return !shellSawChange[j]; }))
        return {V, b.fitError[i]};
    const Shell &outer = shells[active.front()];
    const Shell &inner = shells[active.back()];
    // required shrink from the outer to the inner shell
    const double factor = std::min(1.0, std::pow(inner.meanRadius() / outer.meanRadius(), p.decayExponent));

    auto misfits = [&](const Eigen::VectorXd &t) {
        std::vector<double> a;
        for (int j : active) a.push_back(shells[j].value(t));
        return a;
    };

    if (k == 0) {
        const auto a = misfits(Eigen::VectorXd::Zero(0));
        if (!decays(a, factor, p)) return {Affine::empty(V.ambientDim()), kInf};
        return {V, a.back()};
    }

    // Directions along which the inner-shell curvature vanishes, or has decayed
    // relative to the outer shell, survive the limit.
    const Eigen::MatrixXd innerM = inner.M / static_cast<double>(inner.count);
    const Eigen::MatrixXd outerM = outer.M / static_cast<double>(outer.count);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(innerM);
    const double flat = p.epsDir * (1.0 + symmetricOperatorNorm(innerM));
    std::vector<Eigen::Index> kept, constrained;
    for (Eigen::Index m = 0; m < k; ++m) {
        const double mu = es.eigenvalues()(m);
        const Eigen::VectorXd e = es.eigenvectors().col(m);
        if (mu <= flat || mu <= factor * e.dot(outerM * e)) kept.push_back(m);
        else constrained.push_back(m);
    }
    if (constrained.empty()) {
        const auto a = misfits(Eigen::VectorXd::Zero(k));
        if (!decays(a, factor, p)) return {Affine::empty(V.ambientDim()), kInf};
        return {V, a.back()};
    }

    Eigen::MatrixXd C(k, static_cast<Eigen::Index>(constrained.size()));
    for (std::size_t m = 0; m < constrained.size(); ++m) C.col(m) = es.eigenvectors().col(constrained[m]);
    Eigen::MatrixXd E(k, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t m = 0; m < kept.size(); ++m) E.col(m) = es.eigenvectors().col(kept[m]);

    // Per-shell minimisers over the constrained directions, extrapolated to
    // radius zero from the innermost (up to three) shells.
    std::vector<double> rho;
    std::vector<Eigen::VectorXd> tmin;
    for (auto it = active.rbegin(); it != active.rend() && rho.size() < 3; ++it) {
        const Shell &sh = shells[*it];
        rho.push_back(sh.meanRadius());
        tmin.push_back(restrictedMinimizer(sh.M, sh.c, C));
    }

    for (const Eigen::VectorXd &t : {extrapolateToZero(rho, tmin), tmin.front()}) {
        const auto a = misfits(t);
        if (decays(a, factor, p)) return {Affine::through(base + B * t, B * E), a.back()};
    }
    return {Affine::empty(V.ambientDim()), kInf};
}

Bundle refineOnce(const Bundle &b) {
    Bundle next;
    next.samples = b.samples;
    next.params = b.params;
    next.iteration = b.iteration + 1;
    next.fibers.assign(b.size(), Affine::empty(static_cast<Eigen::Index>(b.unknowns())));
    next.fitError.assign(b.size(), 0.0);
    next.changed.assign(b.size(), 0);
    parallelFor(b.size(), b.params.threads, [&](std::size_t i) {
        auto r = refinePoint(b, i);
        next.changed[i] = subspaceGap(b.fibers[i], r.fiber) > b.params.stabilizationGap;
        next.fibers[i] = std::move(r.fiber);
        next.fitError[i] = r.fitError;
    });
    return next;
}

StabilizeResult stabilize(Bundle b, const std::function<void(const Bundle &)> &observer) {
    StabilizeResult out;
    if (observer) observer(b);
    if (hasEmptyFiber(b)) {
        out.stoppedOnEmpty = true;
        out.bundle = std::move(b);
        return out;
    }
    for (;;) {
        if (out.iterations >= b.params.maxIterations) throw NoStabilization(out.iterations, out.lastGap);
        Bundle next = refineOnce(b);
        ++out.iterations;
        if (observer) observer(next);
        double gap = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) gap = std::max(gap, subspaceGap(b.fibers[i], next.fibers[i]));
        out.lastGap = gap;
        b = std::move(next);
        if (hasEmptyFiber(b)) {
            out.stoppedOnEmpty = true;
            break;
        }
        if (gap <= b.params.stabilizationGap) break;
    }
    out.bundle = std::move(b);
    return out;
}

std::optional<std::size_t> hasEmptyFiber(const Bundle &b) {
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b.fibers[i].isEmpty()) return i;
    return std::nullopt;
}

} // namespace glaeser
