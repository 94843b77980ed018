#ifndef GLAESER_PROBLEM_HPP
#define GLAESER_PROBLEM_HPP

// Problem files (JSON), section CSV files and JSON forms of bundles and reports.
//
// Problem file:
//   {
//     "vars":   ["x", "y"],
//     "domain": {"box": [[-1, 1], [-1, 1]], "constraints": ["x^2 + y^2 <= 1"]},
//     "A":      [["x", "y"]],
//     "gamma":  ["x"],
//     "params": {"level": 5, "theta": 0.5, ...}
//   }

#include "glaeser/bundle.hpp"
#include "glaeser/section.hpp"
#include "glaeser/verify.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace glaeser {

struct ProblemParams {
    int level = 5;
    /// Residual bound used by verify.
    double tol = 1e-6;
    RefineParams refine;
    SectionParams section;
};

struct Problem {
    VarList vars;
    DomainSpec domain;
    SystemSpec system;
    ProblemParams params;
};

/// Reads params keys into `p`, leaving absent keys untouched.
void applyParams(const nlohmann::json &params, ProblemParams &p);

Problem parseProblem(const nlohmann::json &j);
Problem loadProblem(const std::string &path);

nlohmann::json toJson(const Affine &V);
nlohmann::json toJson(const ResidualReport &r, bool perPoint = false);
nlohmann::json toJson(const ContinuityReport &r);
nlohmann::json toJson(const SectionStats &s);
nlohmann::json toJson(const RefineParams &p);

/// One line of a refinement dump: {point, iteration, dim, base, basis, fit_error}.
nlohmann::json fiberRecord(const Bundle &b, std::size_t i);

/// Header x1..xn, phi1..phis, residual, fiber_dim; values as %.12e.
void writeSectionCsv(std::ostream &out, const Section &sec, const Bundle &b, const ResidualReport &res);

struct SectionTable {
    std::size_t n = 0, s = 0;
    std::vector<Eigen::VectorXd> points;
    std::vector<Eigen::VectorXd> values;
    std::vector<double> residual;
    std::vector<int> fiberDim;
};

SectionTable readSectionCsv(std::istream &in);

/// The section stored in `table`, attached to `samples` (points must agree).
Section sectionFromTable(const SectionTable &table, std::shared_ptr<const SampleSet> samples);

} // namespace glaeser

#endif
