#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phireg/types.hpp"

namespace phireg {

class Regularizer;

/// A convex objective exposed through value and one-subgradient queries.
/// Oracles are immutable after construction and safe to evaluate concurrently.
struct ConvexOracle {
  int dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
};

/// Evaluates f(x) and one element of the subdifferential at x.
/// Throws std::invalid_argument on non-finite input or dimension mismatch.
std::pair<double, Vector> eval(const ConvexOracle& oracle, const Vector& x);

/// Exact minimizer of z -> f(z) + phi(z, x)/lambda for regularizer families
/// the problem has an analytic/finite prox for; nullopt otherwise.
using ClosedFormProx =
    std::function<std::optional<Vector>(const Vector& x, const Regularizer& reg)>;

struct BenchmarkProblem {
  std::string name;
  std::string kind;
  ConvexOracle oracle;
  std::optional<Vector> known_minimizer;
  std::optional<double> known_minimum;
  ClosedFormProx closed_form_prox;        // may be empty
  std::string reference_solver_spec;      // how the minimizer was obtained when not analytic
  nlohmann::json parameters;              // kind-specific payload for serialization
};

// Problem factories. Dimensions are fixed per instance; generated instances
// derive all randomness from the given seed.
BenchmarkProblem make_abs_problem();
BenchmarkProblem make_l1_problem(int dimension);
BenchmarkProblem make_maxq_problem(int dimension);
BenchmarkProblem make_max_affine_problem(const Matrix& A, const Vector& b);
BenchmarkProblem make_max_affine_problem(int dimension, int extra_pieces, std::uint64_t seed);
BenchmarkProblem make_composite_problem(const Matrix& Q, const Vector& b, double mu);
BenchmarkProblem make_composite_problem(int dimension, double mu, std::uint64_t seed);
BenchmarkProblem make_quadratic_problem(const Matrix& Q, const Vector& b);

/// The benchmark corpus: 1-D absolute value, l1 norm, MAXQ, a bounded-below
/// max-of-affine instance, and a positive definite quadratic plus l1 composite.
std::vector<BenchmarkProblem> make_problem_suite();

BenchmarkProblem problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const BenchmarkProblem& problem);

/// Machine-precision minimizer of (1/2) z'Az - c'z + t*||z||_1 with A positive
/// definite: proximal-gradient iteration refined by an exact active-set solve.
Vector l1_quadratic_minimize(const Matrix& A, const Vector& c, double t);

} // namespace phireg
