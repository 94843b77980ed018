// glaeser: decide whether A(x) phi(x) = gamma(x) has a continuous solution on a
// box domain, and build one on the sample grid.
//
// Exit codes: 0 solvable / ok, 1 usage or input error, 2 unsolvable (or a
// failed verify), 3 section construction failure.

#include "glaeser/bundle.hpp"
#include "glaeser/errors.hpp"
#include "glaeser/problem.hpp"
#include "glaeser/section.hpp"
#include "glaeser/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace glaeser;

namespace {

enum Exit { kOk = 0, kError = 1, kUnsolvable = 2, kConstruction = 3 };

struct Flags {
    std::string file;
    std::string section;
    std::string out;
    std::optional<int> level;
    std::optional<double> tol;
    std::optional<double> theta;
    std::optional<int> threads;
};

Problem load(const Flags &f) {
    Problem pb = loadProblem(f.file);
    if (f.level) pb.params.level = *f.level;
    if (f.tol) pb.params.tol = *f.tol;
    if (f.theta) pb.params.section.theta = *f.theta;
    if (f.threads) pb.params.refine.threads = pb.params.section.threads = *f.threads;
    return pb;
}

std::string point(const Eigen::VectorXd &x) { return formatPoint({x.data(), x.data() + x.size()}); }

struct Stable {
    std::shared_ptr<const SampleSet> samples;
    StabilizeResult result;
    std::optional<std::size_t> witness;
};

Stable stabilizeProblem(const Problem &pb, const std::function<void(const Bundle &)> &observer = {}) {
    Stable s;
    s.samples = makeSamples(pb.domain, pb.params.level);
    s.result = stabilize(initialBundle(pb.system, s.samples, pb.params.refine), observer);
    s.witness = hasEmptyFiber(s.result.bundle);
    return s;
}

void printCheck(const Stable &s) {
    std::cout << "samples     " << s.samples->size() << " (level " << s.samples->level() << ", h = "
              << s.samples->spacing() << ")\n"
              << "iterations  " << s.result.iterations << "\n";
    if (s.witness)
        std::cout << "solvable    no\nwitness     " << point(s.samples->point(*s.witness)) << "\n";
    else
        std::cout << "solvable    yes\n";
}

std::vector<double> ladder(double h) { return {16.0 * h, 8.0 * h, 4.0 * h}; }

void printReports(const ResidualReport &res, const ContinuityReport &cont) {
    std::printf("residual    max %.3e  mean %.3e  worst at %s\n", res.maxResidual, res.meanResidual,
                point(res.worstPoint).c_str());
    std::printf("modulus    ");
    for (std::size_t k = 0; k < cont.radii.size(); ++k)
        std::printf(" osc(%.4g) = %.3e", cont.radii[k], cont.maxOscillation[k]);
    std::printf("  %s\n", cont.decreasing ? "non-increasing" : "NOT non-increasing");
}

/// Overlapping piecewise guards whose branches disagree are reported, not fatal.
void warnBranchConflicts(const SystemSpec &sys, const SampleSet &samples) {
    double worst = 0.0;
    std::size_t where = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Eigen::VectorXd &x = samples.point(i);
        const std::span<const double> xs(x.data(), x.size());
        for (const auto &f : sys.A)
            if (const double c = f.branchConflict(xs); c > worst) worst = c, where = i;
        for (const auto &f : sys.gamma)
            if (const double c = f.branchConflict(xs); c > worst) worst = c, where = i;
    }
    if (worst > 1e-9)
        std::printf("warning     piecewise branches disagree by %.3e at %s\n", worst,
                    point(samples.point(where)).c_str());
}

int cmdCheck(const Flags &f) {
    const Stable s = stabilizeProblem(load(f));
    printCheck(s);
    return s.witness ? kUnsolvable : kOk;
}

int cmdSolve(const Flags &f) {
    const Problem pb = load(f);
    const auto t0 = std::chrono::steady_clock::now();
    const Stable s = stabilizeProblem(pb);
    printCheck(s);
    if (s.witness) return kUnsolvable;

    SectionStats stats;
    Section sec;
    try {
        sec = buildSection(s.result.bundle, pb.params.section, 0, &stats);
    } catch (const RecursionLimit &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConstruction;
    }
    const auto res = residual(pb.system, sec);
    const auto cont = modulusOfContinuity(sec, ladder(s.samples->spacing()), pb.params.section.threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    printReports(res, cont);

    const std::string out = f.out.empty() ? "section.csv" : f.out;
    std::ofstream csv(out);
    if (!csv) throw FormatError("cannot write " + out);
    writeSectionCsv(csv, sec, s.result.bundle, res);

    nlohmann::json meta = {{"vars", pb.vars},
                           {"level", s.samples->level()},
                           {"h", s.samples->spacing()},
                           {"samples", s.samples->size()},
                           {"iterations", s.result.iterations},
                           {"refine", toJson(s.result.bundle.params)},
                           {"theta", pb.params.section.theta},
                           {"section", toJson(stats)},
                           {"residual", toJson(res)},
                           {"continuity", toJson(cont)},
                           {"seconds", seconds}};
    std::ofstream(out + ".meta.json") << meta.dump(2) << "\n";
    std::cout << "section     " << out << " (metadata in " << out << ".meta.json)\n";
    return kOk;
}

int cmdRefine(const Flags &f) {
    std::ofstream file;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file) throw FormatError("cannot write " + f.out);
    }
    std::ostream &out = f.out.empty() ? std::cout : file;
    const Stable s = stabilizeProblem(load(f), [&](const Bundle &b) {
        for (std::size_t i = 0; i < b.size(); ++i) out << fiberRecord(b, i).dump() << "\n";
    });
    if (!f.out.empty()) printCheck(s);
    return s.witness ? kUnsolvable : kOk;
}

int cmdVerify(const Flags &f) {
    const Problem pb = load(f);
    std::ifstream in(f.section);
    if (!in) throw FormatError("cannot open section file " + f.section);
    const SectionTable table = readSectionCsv(in);
    if (table.s != pb.system.cols)
        throw FormatError("section has " + std::to_string(table.s) + " unknowns, problem has " +
                          std::to_string(pb.system.cols));
    const auto samples = makeSamples(pb.domain, pb.params.level);
    const Section sec = sectionFromTable(table, samples);
    const auto res = residual(pb.system, sec);
    const auto cont = modulusOfContinuity(sec, ladder(samples->spacing()), pb.params.section.threads);
    printReports(res, cont);
    warnBranchConflicts(pb.system, *samples);
    const bool ok = res.maxResidual <= pb.params.tol;
    std::printf("verdict     %s (tolerance %.3e)\n", ok ? "pass" : "FAIL", pb.params.tol);
    if (!f.out.empty()) {
        nlohmann::json report = {
            {"residual", toJson(res)}, {"continuity", toJson(cont)}, {"tol", pb.params.tol}, {"pass", ok}};
        std::ofstream(f.out) << report.dump(2) << "\n";
    }
    return ok ? kOk : kUnsolvable;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Continuous solutions of A(x) phi(x) = gamma(x) by Glaeser refinement"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App *sub) {
        sub->add_option("file", f.file, "problem file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--level", f.level, "sampling level, h = longest side * 2^-level (default 5)");
        sub->add_option("--theta", f.theta, "oscillation threshold (default: chosen per field)");
        sub->add_option("--threads", f.threads, "worker threads, 0 = all cores (default 1)");
    };
    auto *check = app.add_subcommand("check", "decide solvability (exit 0 solvable, 2 not)");
    common(check);
    auto *solve = app.add_subcommand("solve", "build a continuous section and write it as CSV");
    common(solve);
    solve->add_option("--out", f.out, "section CSV path (default section.csv)");
    auto *refine = app.add_subcommand("refine", "dump every refinement iteration as JSON lines");
    common(refine);
    refine->add_option("--out", f.out, "dump path (default stdout)");
    auto *verify = app.add_subcommand("verify", "residual and continuity of a stored section");
    common(verify);
    verify->add_option("section", f.section, "section CSV written by solve")->required();
    verify->add_option("--tol", f.tol, "largest accepted residual (default 1e-6)");
    verify->add_option("--out", f.out, "JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*check) return cmdCheck(f);
        if (*solve) return cmdSolve(f);
        if (*refine) return cmdRefine(f);
        return cmdVerify(f);
    } catch (const SyntaxError &e) {
        std::cerr << "SyntaxError: " << e.what() << "\n";
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}
