#ifndef LPNF_IO_HPP
#define LPNF_IO_HPP

#include <string>

#include <json.hpp>

#include "lpnf/kam.hpp"
#include "lpnf/verify.hpp"

namespace lpnf {

using json = nlohmann::ordered_json;

/// Parsed problem file (strict schema, version 1; unknown keys are errors).
struct Problem {
    std::string name;
    int n = 0, p = 0, l = 0;
    bool rational_morphism = true;
    LinearMorphism S;
    bool rows_given = false;
    bool ring_empty = false; // no invariant monomial up to the degree bound
    ResonantStructure R;     // computed from S if absent
    int basis_degree_bound = 12;
    std::vector<std::vector<UPolyTerm>> integrable; // l u-polynomials, absolute u
    std::vector<XPolyTerm> perturbation;
    int xmax = 17, umax = 2;
    std::vector<cplx> base;
    DiophantineSchedule sched;
    // grid block
    std::vector<CompactGrid::Rect> grid_rects;
    double grid_h = 0.05;
    // verify block
    double rho = 0.1, T = 1.0, flow_tol = 1e-10;
    int n_samples = 16;
    double residual_tol = 1e-9, drift_tol = 1e-6;
    int m0_override = 0; // 0 = derive from the perturbation order

    Context ctx() const { return Context{n, p, xmax, umax, base}; }
    Scenario scenario() const;
};

Problem load_problem(const std::string &path);
Problem problem_from_json(const json &j);

json series_to_json(const Series &s);
Series series_from_json(const json &j);
json field_to_json(const VectorField &X);
json state_to_json(const NormalizationState &st);

/// Emitters for the two built-in scenario problem files.
json hamiltonian_problem_json(int n_pairs, double mu1, double eps, int order,
                              double base_re, double gamma);
json volume_problem_json(int n, double eps, int order, double base_re, double gamma);

void write_text(const std::string &path, const std::string &text);
std::string format_complex(cplx c);

} // namespace lpnf

#endif
