#include "phireg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "phireg/regularizer.hpp"
#include "phireg/rng.hpp"

namespace phireg {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double soft_threshold(double v, double thr) {
  return sign(v) * std::max(std::abs(v) - thr, 0.0);
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

// Per-coordinate weights of the coupling when it is separable; nullopt for a
// non-diagonal metric (those problems fall back to the bundle backend).
std::optional<Vector> separable_weights(const Regularizer& reg, Eigen::Index n) {
  if (reg.kind() == Regularizer::Kind::quadratic) return Vector::Ones(n);
  if (reg.has_diagonal_metric()) return reg.metric_diagonal();
  return std::nullopt;
}

// argmin_z max_i z_i^2 + sum_i w_i (z_i - x_i)^2 / (2 lambda), solved exactly:
// with s = max_i |z_i| the objective reduces to the convex piecewise quadratic
// psi(s) = s^2 + sum_{|x_i| > s} w_i (|x_i| - s)^2 / (2 lambda), minimized by
// scanning the sorted breakpoints |x_i|.
Vector maxq_prox(const Vector& x, double lambda, const Vector& w) {
  const Eigen::Index n = x.size();
  Vector u = x.cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return u[a] > u[b]; });

  double s = 0.0;
  if (n > 0 && u[order[0]] > 0.0) {
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    for (std::size_t j = 0; j < order.size(); ++j) {
      weighted_sum += w[order[j]] * u[order[j]];
      weight_total += w[order[j]];
      const double cand = weighted_sum / (2.0 * lambda + weight_total);
      const double hi = u[order[j]];
      const double lo = (j + 1 < order.size()) ? u[order[j + 1]] : 0.0;
      if (cand >= lo && cand <= hi) {
        s = cand;
        break;
      }
      s = std::clamp(cand, lo, hi);  // fp fallback; the loop normally breaks
    }
  }
  Vector p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = std::clamp(x[i], -s, s);
  return p;
}

double kkt_residual_l1(const Matrix& A, const Vector& c, double t, const Vector& z) {
  Vector g = A * z - c;
  double r = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] != 0.0)
      r = std::max(r, std::abs(g[i] + t * sign(z[i])));
    else
      r = std::max(r, std::max(0.0, std::abs(g[i]) - t));
  }
  return r;
}

// Exact solve on a fixed support with sign pattern sigma; shrinks the support
// on sign flips and grows it on off-support violations until the KKT system is
// consistent.
std::optional<Vector> active_set_polish(const Matrix& A, const Vector& c, double t,
                                        const Vector& z0, double off_tol) {
  const Eigen::Index n = A.rows();
  std::vector<Eigen::Index> support;
  std::vector<double> sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (z0[i] != 0.0) {
      support.push_back(i);
      sigma.push_back(sign(z0[i]));
    }
  }
  const int max_rounds = static_cast<int>(4 * n + 8);
  for (int round = 0; round < max_rounds; ++round) {
    Vector z = Vector::Zero(n);
    if (!support.empty()) {
      const Eigen::Index k = static_cast<Eigen::Index>(support.size());
      Matrix As(k, k);
      Vector cs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        cs[a] = c[support[a]] - t * sigma[a];
        for (Eigen::Index b = 0; b < k; ++b) As(a, b) = A(support[a], support[b]);
      }
      Vector ws = As.ldlt().solve(cs);
      if (!ws.allFinite()) return std::nullopt;
      // drop the worst sign violation, if any
      int worst = -1;
      double worst_val = 0.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        const double v = ws[a] * sigma[a];
        if (v < worst_val) {
          worst_val = v;
          worst = static_cast<int>(a);
        }
      }
      if (worst >= 0) {
        support.erase(support.begin() + worst);
        sigma.erase(sigma.begin() + worst);
        continue;
      }
      for (Eigen::Index a = 0; a < k; ++a) z[support[a]] = ws[a];
    }
    // grow on the worst off-support violation
    Vector g = A * z - c;
    Eigen::Index grow = -1;
    double grow_val = off_tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (z[i] != 0.0) continue;
      const double v = std::abs(g[i]) - t;
      if (v > grow_val) {
        grow_val = v;
        grow = i;
      }
    }
    if (grow < 0) return z;
    support.push_back(grow);
    sigma.push_back(-sign(g[grow]));
  }
  return std::nullopt;
}

} // namespace

Vector l1_quadratic_minimize(const Matrix& A, const Vector& c, double t) {
  if (t < 0.0) throw std::invalid_argument("l1_quadratic_minimize: negative penalty");
  if (A.rows() != A.cols() || A.rows() != c.size())
    throw std::invalid_argument("l1_quadratic_minimize: dimension mismatch");
  if (t == 0.0) return A.ldlt().solve(c);

  const double scale = std::max({1.0, c.lpNorm<Eigen::Infinity>(), t});
  const double kkt_tol = 1e-13 * scale;
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues().maxCoeff();

  Vector z = Vector::Zero(A.rows());
  const int blocks = 400;
  const int steps_per_block = 250;
  for (int blk = 0; blk < blocks; ++blk) {
    for (int it = 0; it < steps_per_block; ++it) {
      Vector grad = A * z - c;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        z[i] = soft_threshold(z[i] - grad[i] / lip, t / lip);
    }
    const double res = kkt_residual_l1(A, c, t, z);
    if (res <= 1e-8 * scale) {
      if (auto polished = active_set_polish(A, c, t, z, 1e-12 * scale)) {
        if (kkt_residual_l1(A, c, t, *polished) <= kkt_tol) return *polished;
      }
    }
    if (res <= kkt_tol) return z;
  }
  return z;  // best effort; callers treat the result as the reference point
}

std::pair<double, Vector> eval(const ConvexOracle& oracle, const Vector& x) {
  if (x.size() != oracle.dimension)
    throw std::invalid_argument("eval: point dimension does not match oracle");
  if (!x.allFinite()) throw std::invalid_argument("eval: non-finite input point");
  return {oracle.value(x), oracle.subgradient(x)};
}

BenchmarkProblem make_abs_problem() {
  BenchmarkProblem p;
  p.name = "abs";
  p.kind = "abs";
  p.oracle.dimension = 1;
  p.oracle.value = [](const Vector& x) { return std::abs(x[0]); };
  p.oracle.subgradient = [](const Vector& x) {
    Vector s(1);
    s[0] = sign(x[0]);
    return s;
  };
  p.known_minimizer = Vector::Zero(1);
  p.known_minimum = 0.0;
  p.closed_form_prox = [](const Vector& x, const Regularizer& reg) -> std::optional<Vector> {
    auto w = separable_weights(reg, 1);
    if (!w) return std::nullopt;
    Vector z(1);
    z[0] = soft_threshold(x[0], reg.lambda() / (*w)[0]);
    return z;
  };
  p.parameters = nlohmann::json::object();
  return p;
}

BenchmarkProblem make_l1_problem(int dimension) {
  if (dimension <= 0) throw std::invalid_argument("make_l1_problem: dimension must be positive");
  BenchmarkProblem p;
  p.name = "l1_n" + std::to_string(dimension);
  p.kind = "l1";
  p.oracle.dimension = dimension;
  p.oracle.value = [](const Vector& x) { return x.lpNorm<1>(); };
  p.oracle.subgradient = [](const Vector& x) {
    Vector s(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) s[i] = sign(x[i]);
    return s;
  };
  p.known_minimizer = Vector::Zero(dimension);
  p.known_minimum = 0.0;
  p.closed_form_prox = [](const Vector& x, const Regularizer& reg) -> std::optional<Vector> {
    auto w = separable_weights(reg, x.size());
    if (!w) return std::nullopt;
    Vector z(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      z[i] = soft_threshold(x[i], reg.lambda() / (*w)[i]);
    return z;
  };
  p.parameters = nlohmann::json::object();
  return p;
}

BenchmarkProblem make_maxq_problem(int dimension) {
  if (dimension <= 0) throw std::invalid_argument("make_maxq_problem: dimension must be positive");
  BenchmarkProblem p;
  p.name = "maxq_n" + std::to_string(dimension);
  p.kind = "maxq";
  p.oracle.dimension = dimension;
  p.oracle.value = [](const Vector& x) { return x.cwiseAbs2().maxCoeff(); };
  p.oracle.subgradient = [](const Vector& x) {
    // lowest index among maximizers, for reproducible kink behavior
    Eigen::Index arg = 0;
    double best = x[0] * x[0];
    for (Eigen::Index i = 1; i < x.size(); ++i) {
      const double v = x[i] * x[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    Vector s = Vector::Zero(x.size());
    s[arg] = 2.0 * x[arg];
    return s;
  };
  p.known_minimizer = Vector::Zero(dimension);
  p.known_minimum = 0.0;
  p.closed_form_prox = [](const Vector& x, const Regularizer& reg) -> std::optional<Vector> {
    auto w = separable_weights(reg, x.size());
    if (!w) return std::nullopt;
    return maxq_prox(x, reg.lambda(), *w);
  };
  p.parameters = nlohmann::json::object();
  return p;
}

BenchmarkProblem make_max_affine_problem(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size() || A.rows() == 0)
    throw std::invalid_argument("make_max_affine_problem: inconsistent piece data");
  BenchmarkProblem p;
  p.name = "max_affine_n" + std::to_string(A.cols());
  p.kind = "max_affine";
  p.oracle.dimension = static_cast<int>(A.cols());
  p.oracle.value = [A, b](const Vector& x) { return (A * x + b).maxCoeff(); };
  p.oracle.subgradient = [A, b](const Vector& x) {
    Vector vals = A * x + b;
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < vals.size(); ++j)
      if (vals[j] > vals[arg]) arg = j;
    return Vector(A.row(arg).transpose());
  };
  p.parameters = {{"A", matrix_to_json(A)}, {"b", vector_to_json(b)}};
  return p;
}

BenchmarkProblem make_max_affine_problem(int dimension, int extra_pieces, std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("make_max_affine_problem: dimension must be positive");
  if (extra_pieces < 0) throw std::invalid_argument("make_max_affine_problem: negative piece count");
  CounterRng rng(seed, /*stream=*/101);
  const int rows = 2 * dimension + extra_pieces;
  Matrix A = Matrix::Zero(rows, dimension);
  Vector b(rows);
  // anchor pieces +-e_i'x - 1 guarantee an interior minimizer at the origin
  for (int i = 0; i < dimension; ++i) {
    A(2 * i, i) = 1.0;
    A(2 * i + 1, i) = -1.0;
    b[2 * i] = -1.0;
    b[2 * i + 1] = -1.0;
  }
  for (int j = 0; j < extra_pieces; ++j) {
    for (int i = 0; i < dimension; ++i) A(2 * dimension + j, i) = rng.uniform(-1.0, 1.0);
    b[2 * dimension + j] = rng.uniform(-3.0, -1.2);
  }
  BenchmarkProblem p = make_max_affine_problem(A, b);
  p.known_minimizer = Vector::Zero(dimension);
  p.known_minimum = -1.0;
  return p;
}

BenchmarkProblem make_composite_problem(const Matrix& Q, const Vector& b, double mu) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size())
    throw std::invalid_argument("make_composite_problem: dimension mismatch");
  if (mu < 0.0) throw std::invalid_argument("make_composite_problem: negative l1 weight");
  if (Eigen::LLT<Matrix>(Q).info() != Eigen::Success)
    throw std::invalid_argument("make_composite_problem: Q is not positive definite");
  BenchmarkProblem p;
  p.name = "composite_n" + std::to_string(Q.rows());
  p.kind = "composite";
  p.oracle.dimension = static_cast<int>(Q.rows());
  p.oracle.value = [Q, b, mu](const Vector& x) {
    return 0.5 * x.dot(Q * x) - b.dot(x) + mu * x.lpNorm<1>();
  };
  p.oracle.subgradient = [Q, b, mu](const Vector& x) {
    Vector s = Q * x - b;
    for (Eigen::Index i = 0; i < x.size(); ++i) s[i] += mu * sign(x[i]);
    return s;
  };
  p.closed_form_prox = [Q, b, mu](const Vector& x, const Regularizer& reg) -> std::optional<Vector> {
    // theta(z) scaled by lambda is (1/2) z'(lambda Q + M) z - (lambda b + M x)'z
    // + lambda mu ||z||_1, an exactly solvable penalized quadratic.
    const double lambda = reg.lambda();
    Matrix A = lambda * Q;
    Vector c = lambda * b + reg.apply_metric(x);
    if (reg.kind() == Regularizer::Kind::quadratic)
      A += Matrix::Identity(Q.rows(), Q.cols());
    else
      A += reg.metric_matrix();
    return l1_quadratic_minimize(A, c, lambda * mu);
  };
  p.known_minimizer = l1_quadratic_minimize(Q, b, mu);
  p.known_minimum = p.oracle.value(*p.known_minimizer);
  p.reference_solver_spec =
      "proximal-gradient on the smooth part with soft-threshold steps to tolerance 1e-12, "
      "refined by an exact active-set solve";
  p.parameters = {{"Q", matrix_to_json(Q)}, {"b", vector_to_json(b)}, {"mu", mu}};
  return p;
}

BenchmarkProblem make_composite_problem(int dimension, double mu, std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("make_composite_problem: dimension must be positive");
  CounterRng rng(seed, /*stream=*/202);
  Matrix G(dimension, dimension);
  for (Eigen::Index i = 0; i < dimension; ++i)
    for (Eigen::Index j = 0; j < dimension; ++j) G(i, j) = rng.normal();
  Matrix Q0 = G.transpose() * G;
  Q0 = 0.5 * (Q0 + Q0.transpose());
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(Q0).eigenvalues().maxCoeff();
  // eigenvalues mapped into [0.5, 2.0]
  Matrix Q = (1.5 / top) * Q0 + 0.5 * Matrix::Identity(dimension, dimension);
  Vector b = rng.uniform_vector(dimension, -2.0, 2.0);
  return make_composite_problem(Q, b, mu);
}

BenchmarkProblem make_quadratic_problem(const Matrix& Q, const Vector& b) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size())
    throw std::invalid_argument("make_quadratic_problem: dimension mismatch");
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("make_quadratic_problem: Q is not positive definite");
  BenchmarkProblem p;
  p.name = "quadratic_n" + std::to_string(Q.rows());
  p.kind = "quadratic";
  p.oracle.dimension = static_cast<int>(Q.rows());
  p.oracle.value = [Q, b](const Vector& x) { return 0.5 * x.dot(Q * x) - b.dot(x); };
  p.oracle.subgradient = [Q, b](const Vector& x) { return Vector(Q * x - b); };
  p.closed_form_prox = [Q, b](const Vector& x, const Regularizer& reg) -> std::optional<Vector> {
    const double lambda = reg.lambda();
    Matrix A = lambda * Q;
    Vector c = lambda * b + reg.apply_metric(x);
    if (reg.kind() == Regularizer::Kind::quadratic)
      A += Matrix::Identity(Q.rows(), Q.cols());
    else
      A += reg.metric_matrix();
    return Vector(A.ldlt().solve(c));
  };
  p.known_minimizer = llt.solve(b);
  p.known_minimum = p.oracle.value(*p.known_minimizer);
  p.parameters = {{"Q", matrix_to_json(Q)}, {"b", vector_to_json(b)}};
  return p;
}

std::vector<BenchmarkProblem> make_problem_suite() {
  std::vector<BenchmarkProblem> suite;
  suite.push_back(make_abs_problem());
  suite.push_back(make_l1_problem(5));
  suite.push_back(make_maxq_problem(4));
  suite.push_back(make_max_affine_problem(3, 6, 90101));
  suite.push_back(make_composite_problem(10, 1.0, 90202));
  return suite;
}

nlohmann::json problem_to_json(const BenchmarkProblem& problem) {
  nlohmann::json doc{{"name", problem.name},
                     {"kind", problem.kind},
                     {"dimension", problem.oracle.dimension},
                     {"parameters", problem.parameters}};
  if (problem.known_minimizer) doc["known_minimizer"] = vector_to_json(*problem.known_minimizer);
  if (problem.known_minimum) doc["known_minimum"] = *problem.known_minimum;
  return doc;
}

BenchmarkProblem problem_from_json(const nlohmann::json& doc) {
  if (!doc.contains("kind")) throw std::invalid_argument("problem: missing 'kind'");
  const std::string kind = doc.at("kind").get<std::string>();
  const int dim = doc.value("dimension", 0);
  const nlohmann::json params = doc.value("parameters", nlohmann::json::object());

  BenchmarkProblem p;
  if (kind == "abs") {
    p = make_abs_problem();
  } else if (kind == "l1") {
    p = make_l1_problem(dim);
  } else if (kind == "maxq") {
    p = make_maxq_problem(dim);
  } else if (kind == "max_affine") {
    if (params.contains("A"))
      p = make_max_affine_problem(matrix_from_json(params.at("A")), vector_from_json(params.at("b")));
    else
      p = make_max_affine_problem(dim, params.value("extra_pieces", 6),
                                  params.value("seed", std::uint64_t{90101}));
  } else if (kind == "composite") {
    if (!params.contains("mu")) throw std::invalid_argument("composite problem: missing 'mu'");
    if (params.contains("Q"))
      p = make_composite_problem(matrix_from_json(params.at("Q")), vector_from_json(params.at("b")),
                                 params.at("mu").get<double>());
    else
      p = make_composite_problem(dim, params.at("mu").get<double>(),
                                 params.value("seed", std::uint64_t{90202}));
  } else if (kind == "quadratic") {
    p = make_quadratic_problem(matrix_from_json(params.at("Q")), vector_from_json(params.at("b")));
  } else {
    throw std::invalid_argument("problem: unknown kind '" + kind + "'");
  }
  if (dim != 0 && p.oracle.dimension != dim)
    throw std::invalid_argument("problem: declared dimension does not match parameters");
  if (doc.contains("name")) p.name = doc.at("name").get<std::string>();
  if (doc.contains("known_minimizer")) p.known_minimizer = vector_from_json(doc.at("known_minimizer"));
  if (doc.contains("known_minimum")) p.known_minimum = doc.at("known_minimum").get<double>();
  return p;
}

} // namespace phireg
