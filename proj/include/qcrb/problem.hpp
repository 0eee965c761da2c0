// Copyright 2026 The qcrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Problem documents and run reports.
//
// A problem document is JSON with schema_version 1:
//
//   {
//     "schema_version": 1,
//     "dimension": 2,
//     "hamiltonian": {"kind": "explicit", "matrix": [[[0,0],[0.5,0]], [[0.5,0],[0,0]]]},
//     "state": {"kind": "diagonal", "weights": [0.75, 0.25]},
//     "estimator": {"kind": "conjugate"},            // optional
//     "times": [0.0, 0.5],
//     "orders": [1, 3],
//     "include_even_order_2": false,
//     "tolerances": {"degeneracy": 1e-10, "report_precision": 15}
//   }
//
// Complex entries are [re, im]; matrices are row-major nested arrays.
// Hamiltonian kinds: explicit, gue (+seed), oscillator. State kinds:
// explicit, ginibre (+seed), diagonal (+weights), pure_haar (+seed).
// Estimator kinds: explicit, conjugate (oscillator only). Unknown fields are
// rejected with a SchemaError whose path is a JSON pointer.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qcrb/bounds.hpp"
#include "qcrb/config.hpp"
#include "qcrb/oracle.hpp"
#include "qcrb/states.hpp"

namespace qcrb {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr int kMaxOrder = 15;

struct HamiltonianSpec {
  std::string kind;  // explicit | gue | oscillator
  std::optional<ComplexMatrix> matrix;
  std::optional<std::uint64_t> seed;
};

struct StateSpec {
  std::string kind;  // explicit | ginibre | diagonal | pure_haar
  std::optional<ComplexMatrix> matrix;
  std::optional<std::uint64_t> seed;
  std::vector<double> weights;
};

struct EstimatorSpec {
  std::string kind;  // explicit | conjugate
  std::optional<ComplexMatrix> matrix;
};

struct Tolerances {
  double degeneracy = kDegeneracyTolerance;
  int report_precision = 15;
};

struct ProblemSpec {
  int schema_version = kSchemaVersion;
  int dimension = 0;
  HamiltonianSpec hamiltonian;
  StateSpec state;
  std::optional<EstimatorSpec> estimator;
  std::vector<double> times{0.0};
  std::vector<int> orders{1, 3};
  bool include_even_order_2 = false;
  Tolerances tolerances;

  int max_odd_order() const {
    int m = 1;
    for (int n : orders) {
      if (n % 2 == 1) m = std::max(m, n);
    }
    return m;
  }
};

namespace detail {

inline bool same_matrix(const std::optional<ComplexMatrix>& a, const std::optional<ComplexMatrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace detail

inline bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  const auto est_equal = [&] {
    if (a.estimator.has_value() != b.estimator.has_value()) return false;
    if (!a.estimator) return true;
    return a.estimator->kind == b.estimator->kind &&
           detail::same_matrix(a.estimator->matrix, b.estimator->matrix);
  };
  return a.schema_version == b.schema_version && a.dimension == b.dimension &&
         a.hamiltonian.kind == b.hamiltonian.kind &&
         detail::same_matrix(a.hamiltonian.matrix, b.hamiltonian.matrix) &&
         a.hamiltonian.seed == b.hamiltonian.seed && a.state.kind == b.state.kind &&
         detail::same_matrix(a.state.matrix, b.state.matrix) && a.state.seed == b.state.seed &&
         a.state.weights == b.state.weights && est_equal() && a.times == b.times &&
         a.orders == b.orders && a.include_even_order_2 == b.include_even_order_2 &&
         a.tolerances.degeneracy == b.tolerances.degeneracy &&
         a.tolerances.report_precision == b.tolerances.report_precision;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

class SpecReader {
 public:
  static void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
  }

  static void reject_unknown(const Json& j, const std::string& path,
                             std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&key](const char* a) { return key == a; });
      if (!known) throw SchemaError(path + "/" + key, "unknown field");
    }
  }

  static const Json& field(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw SchemaError(path + "/" + key, "missing required field");
    return j.at(key);
  }

  static std::string string_field(const Json& j, const std::string& path, const char* key) {
    const Json& v = field(j, path, key);
    if (!v.is_string()) throw SchemaError(path + "/" + key, "expected a string");
    return v.get<std::string>();
  }

  static double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(path, "not finite");
    return x;
  }

  static std::int64_t integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(INT64_MAX)) {
      throw SchemaError(path, "integer out of range");
    }
    return v.get<std::int64_t>();
  }

  static std::uint64_t seed(const Json& j, const std::string& path) {
    const Json& v = field(j, path, "seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw SchemaError(path + "/seed", "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  static ComplexMatrix matrix(const Json& v, const std::string& path, int dim) {
    if (!v.is_array()) throw SchemaError(path, "expected a row-major array of rows");
    if (static_cast<int>(v.size()) != dim) {
      throw DimensionMismatch(path + ": " + std::to_string(v.size()) + " rows for dimension " +
                              std::to_string(dim));
    }
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const Json& row = v[static_cast<std::size_t>(i)];
      const std::string rp = path + "/" + std::to_string(i);
      if (!row.is_array()) throw SchemaError(rp, "expected an array of [re, im] pairs");
      if (static_cast<int>(row.size()) != dim) {
        throw DimensionMismatch(rp + ": " + std::to_string(row.size()) + " columns for dimension " +
                                std::to_string(dim));
      }
      for (int k = 0; k < dim; ++k) {
        const Json& e = row[static_cast<std::size_t>(k)];
        const std::string ep = rp + "/" + std::to_string(k);
        if (!e.is_array() || e.size() != 2) throw SchemaError(ep, "expected [re, im]");
        m(i, k) = Complex(number(e[0], ep + "/0"), number(e[1], ep + "/1"));
      }
    }
    return m;
  }
};

inline void check_hermitian(const ComplexMatrix& m, const std::string& path) {
  try {
    HermitianOperator{m};
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

inline void validate_orders(const std::vector<int>& orders, bool even2, const std::string& path) {
  if (orders.empty()) throw SchemaError(path, "at least one order is required");
  std::set<int> seen;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const int n = orders[i];
    const std::string p = path + "/" + std::to_string(i);
    if (n < 1 || n > kMaxOrder) {
      throw SchemaError(p, "order must lie in 1.." + std::to_string(kMaxOrder));
    }
    if (n % 2 == 0 && !(n == 2 && even2)) {
      throw SchemaError(p, "order " + std::to_string(n) +
                               " is even; only 2 is allowed, with include_even_order_2");
    }
    if (!seen.insert(n).second) throw SchemaError(p, "duplicate order");
  }
}

}  // namespace detail

/// Odd orders parsed from "1,3,5" (the CLI override form).
inline std::vector<int> parse_order_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw SchemaError("/orders", "cannot parse '" + item + "'");
    }
    if (used != item.size()) throw SchemaError("/orders", "cannot parse '" + item + "'");
    out.push_back(n);
  }
  return out;
}

inline ProblemSpec parse_spec_json(const Json& doc) {
  using R = detail::SpecReader;
  R::require_object(doc, "");
  R::reject_unknown(doc, "", {"schema_version", "dimension", "hamiltonian", "state", "estimator",
                              "times", "orders", "include_even_order_2", "tolerances"});
  ProblemSpec spec;
  const std::int64_t version = R::integer(R::field(doc, "", "schema_version"), "/schema_version");
  if (version != kSchemaVersion) {
    throw SchemaError("/schema_version", "unsupported version " + std::to_string(version));
  }
  const std::int64_t dim = R::integer(R::field(doc, "", "dimension"), "/dimension");
  if (dim < 2 || dim > 256) throw SchemaError("/dimension", "must lie in 2..256");
  spec.dimension = static_cast<int>(dim);
  const int d = spec.dimension;

  {
    const Json& h = R::field(doc, "", "hamiltonian");
    R::require_object(h, "/hamiltonian");
    spec.hamiltonian.kind = R::string_field(h, "/hamiltonian", "kind");
    const std::string& kind = spec.hamiltonian.kind;
    if (kind == "explicit") {
      R::reject_unknown(h, "/hamiltonian", {"kind", "matrix"});
      spec.hamiltonian.matrix = R::matrix(R::field(h, "/hamiltonian", "matrix"), "/hamiltonian/matrix", d);
      detail::check_hermitian(*spec.hamiltonian.matrix, "/hamiltonian/matrix");
    } else if (kind == "gue") {
      R::reject_unknown(h, "/hamiltonian", {"kind", "seed"});
      spec.hamiltonian.seed = R::seed(h, "/hamiltonian");
    } else if (kind == "oscillator") {
      R::reject_unknown(h, "/hamiltonian", {"kind"});
      if (d < 8) throw SchemaError("/dimension", "oscillator needs dimension >= 8");
    } else {
      throw SchemaError("/hamiltonian/kind", "unknown kind '" + kind + "'");
    }
  }

  {
    const Json& s = R::field(doc, "", "state");
    R::require_object(s, "/state");
    spec.state.kind = R::string_field(s, "/state", "kind");
    const std::string& kind = spec.state.kind;
    if (kind == "explicit") {
      R::reject_unknown(s, "/state", {"kind", "matrix"});
      spec.state.matrix = R::matrix(R::field(s, "/state", "matrix"), "/state/matrix", d);
      try {
        make_density(*spec.state.matrix);
      } catch (const Error& e) {
        throw SchemaError("/state/matrix", e.what());
      }
    } else if (kind == "ginibre" || kind == "pure_haar") {
      R::reject_unknown(s, "/state", {"kind", "seed"});
      spec.state.seed = R::seed(s, "/state");
    } else if (kind == "diagonal") {
      R::reject_unknown(s, "/state", {"kind", "weights"});
      const Json& w = R::field(s, "/state", "weights");
      if (!w.is_array()) throw SchemaError("/state/weights", "expected an array");
      if (static_cast<int>(w.size()) != d) {
        throw DimensionMismatch("/state/weights: " + std::to_string(w.size()) +
                                " weights for dimension " + std::to_string(d));
      }
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = R::number(w[i], "/state/weights/" + std::to_string(i));
        if (x < 0.0) throw SchemaError("/state/weights/" + std::to_string(i), "negative weight");
        spec.state.weights.push_back(x);
        total += x;
      }
      if (std::abs(total - 1.0) > kTraceTolerance) {
        throw SchemaError("/state/weights", "weights sum to " + std::to_string(total) +
                                                ", not 1 within 1e-8");
      }
      for (double& x : spec.state.weights) x /= total;
    } else {
      throw SchemaError("/state/kind", "unknown kind '" + kind + "'");
    }
  }

  if (doc.contains("estimator")) {
    const Json& e = doc.at("estimator");
    R::require_object(e, "/estimator");
    EstimatorSpec est;
    est.kind = R::string_field(e, "/estimator", "kind");
    if (est.kind == "explicit") {
      R::reject_unknown(e, "/estimator", {"kind", "matrix"});
      est.matrix = R::matrix(R::field(e, "/estimator", "matrix"), "/estimator/matrix", d);
      detail::check_hermitian(*est.matrix, "/estimator/matrix");
    } else if (est.kind == "conjugate") {
      R::reject_unknown(e, "/estimator", {"kind"});
      if (spec.hamiltonian.kind != "oscillator") {
        throw SchemaError("/estimator/kind", "conjugate estimator needs the oscillator hamiltonian");
      }
    } else {
      throw SchemaError("/estimator/kind", "unknown kind '" + est.kind + "'");
    }
    spec.estimator = est;
  }

  if (doc.contains("times")) {
    const Json& t = doc.at("times");
    if (!t.is_array() || t.empty()) throw SchemaError("/times", "expected a non-empty array");
    spec.times.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      spec.times.push_back(R::number(t[i], "/times/" + std::to_string(i)));
    }
  }

  if (doc.contains("include_even_order_2")) {
    const Json& b = doc.at("include_even_order_2");
    if (!b.is_boolean()) throw SchemaError("/include_even_order_2", "expected a boolean");
    spec.include_even_order_2 = b.get<bool>();
  }

  if (doc.contains("orders")) {
    const Json& o = doc.at("orders");
    if (!o.is_array()) throw SchemaError("/orders", "expected an array");
    spec.orders.clear();
    for (std::size_t i = 0; i < o.size(); ++i) {
      spec.orders.push_back(static_cast<int>(R::integer(o[i], "/orders/" + std::to_string(i))));
    }
  }
  detail::validate_orders(spec.orders, spec.include_even_order_2, "/orders");
  std::sort(spec.orders.begin(), spec.orders.end());

  if (doc.contains("tolerances")) {
    const Json& t = doc.at("tolerances");
    R::require_object(t, "/tolerances");
    R::reject_unknown(t, "/tolerances", {"degeneracy", "report_precision"});
    if (t.contains("degeneracy")) {
      const double v = R::number(t.at("degeneracy"), "/tolerances/degeneracy");
      if (!(v > 0.0 && v < 1.0)) throw SchemaError("/tolerances/degeneracy", "must lie in (0, 1)");
      spec.tolerances.degeneracy = v;
    }
    if (t.contains("report_precision")) {
      const std::int64_t p = R::integer(t.at("report_precision"), "/tolerances/report_precision");
      if (p < 1 || p > 17) throw SchemaError("/tolerances/report_precision", "must lie in 1..17");
      spec.tolerances.report_precision = static_cast<int>(p);
    }
  }
  return spec;
}

inline ProblemSpec parse_spec(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_spec_json(doc);
}

/// Replaces the order list, with the same validation as the document field.
inline void override_orders(ProblemSpec& spec, std::vector<int> orders) {
  detail::validate_orders(orders, spec.include_even_order_2, "/orders");
  std::sort(orders.begin(), orders.end());
  spec.orders = std::move(orders);
}

// ---------------------------------------------------------------------------
// Serialization.

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json spec_to_json(const ProblemSpec& spec) {
  Json doc;
  doc["schema_version"] = spec.schema_version;
  doc["dimension"] = spec.dimension;
  Json h;
  h["kind"] = spec.hamiltonian.kind;
  if (spec.hamiltonian.matrix) h["matrix"] = matrix_to_json(*spec.hamiltonian.matrix);
  if (spec.hamiltonian.seed) h["seed"] = *spec.hamiltonian.seed;
  doc["hamiltonian"] = h;
  Json s;
  s["kind"] = spec.state.kind;
  if (spec.state.matrix) s["matrix"] = matrix_to_json(*spec.state.matrix);
  if (spec.state.seed) s["seed"] = *spec.state.seed;
  if (spec.state.kind == "diagonal") s["weights"] = spec.state.weights;
  doc["state"] = s;
  if (spec.estimator) {
    Json e;
    e["kind"] = spec.estimator->kind;
    if (spec.estimator->matrix) e["matrix"] = matrix_to_json(*spec.estimator->matrix);
    doc["estimator"] = e;
  }
  doc["times"] = spec.times;
  doc["orders"] = spec.orders;
  doc["include_even_order_2"] = spec.include_even_order_2;
  doc["tolerances"] = {{"degeneracy", spec.tolerances.degeneracy},
                       {"report_precision", spec.tolerances.report_precision}};
  return doc;
}

inline std::string serialize(const ProblemSpec& spec) { return spec_to_json(spec).dump(2); }

inline std::uint64_t spec_fingerprint(const ProblemSpec& spec) {
  const std::string text = spec_to_json(spec).dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

// ---------------------------------------------------------------------------
// Materialization and the compute pipeline.

struct Problem {
  HermitianOperator h;
  DensityMatrix rho;
  std::optional<HermitianOperator> t_est;
  std::optional<ConjugatePair> pair;
};

inline Problem materialize(const ProblemSpec& spec) {
  const int d = spec.dimension;
  std::optional<ConjugatePair> pair;
  if (spec.hamiltonian.kind == "oscillator") pair = truncated_conjugate_pair(d);

  const HermitianOperator h = spec.hamiltonian.kind == "explicit"
                                  ? HermitianOperator(*spec.hamiltonian.matrix)
                              : spec.hamiltonian.kind == "gue"
                                  ? random_hamiltonian(d, *spec.hamiltonian.seed)
                                  : pair->h;
  DensityMatrix rho = spec.state.kind == "explicit"  ? make_density(*spec.state.matrix)
                      : spec.state.kind == "ginibre" ? random_mixed(d, *spec.state.seed)
                      : spec.state.kind == "pure_haar"
                          ? random_pure(d, *spec.state.seed)
                          : make_diagonal_density(spec.state.weights);
  std::optional<HermitianOperator> t_est;
  if (spec.estimator) {
    t_est = spec.estimator->kind == "explicit" ? HermitianOperator(*spec.estimator->matrix)
                                               : pair->t_est;
  }
  return {h, std::move(rho), t_est, pair};
}

struct Check {
  std::string name;
  double observed = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct TimeRecord {
  double time = 0.0;
  std::map<int, double> moments;       // keyed by 2n
  std::array<double, 3> closed_form{};  // mu_2, mu_4, mu_6
  std::map<int, double> oracle_norms;  // ||psi_n||^2, non-degenerate odd n
  BoundReport bound;
  StatSummary stats_h;
  std::optional<StatSummary> stats_t;
  std::optional<Order1Product> order1;
  std::optional<ConjugationDiagnostics> diagnostics;
  std::optional<double> direct_bhattacharyya;
};

struct RunReport {
  std::string version = kVersion;
  std::uint64_t spec_fingerprint = 0;
  int report_precision = 15;
  std::vector<int> orders;
  std::vector<TimeRecord> records;
  std::map<int, double> moment_drift;  // max relative drift of mu_2n over the time grid
  std::optional<std::map<int, double>> kappa_drift;
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

namespace detail {

[[noreturn]] inline void rethrow_at_time(const Error& e, std::size_t index, double t) {
  const std::string msg = e.message() + " (time index " + std::to_string(index) +
                          ", t = " + std::to_string(t) + ")";
  switch (e.kind()) {
    case ErrorKind::kDimensionMismatch: throw DimensionMismatch(msg);
    case ErrorKind::kNotHermitian: throw NotHermitian(msg);
    case ErrorKind::kNotPositiveSemidefinite: throw NotPositiveSemidefinite(msg);
    case ErrorKind::kTraceDeviationTooLarge: throw TraceDeviationTooLarge(msg);
    case ErrorKind::kNonFinite: throw NonFinite(msg);
    case ErrorKind::kInvalidArgument: throw InvalidArgument(msg);
    case ErrorKind::kMissingMoment: throw MissingMoment(msg);
    case ErrorKind::kDegenerateGram: throw DegenerateGram(msg);
    case ErrorKind::kZeroFisherInformation: throw ZeroFisherInformation(msg);
    case ErrorKind::kImaginaryResidue: throw ImaginaryResidue(msg);
    case ErrorKind::kSchema: throw SchemaError("", msg);
  }
  throw InvalidArgument(msg);
}

inline double relative(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace detail

inline RunReport run_compute(const ProblemSpec& spec) {
  const Problem p = materialize(spec);
  const SqrtState xi0 = sqrt_embed(p.rho);
  const UnitaryPropagator prop(p.h);
  const int n_max = spec.max_odd_order();
  const int stack_order = std::max(n_max, spec.include_even_order_2 ? 2 : 1);
  const double tol = spec.tolerances.degeneracy;

  RunReport report;
  report.spec_fingerprint = spec_fingerprint(spec);
  report.report_precision = spec.tolerances.report_precision;
  report.orders = spec.orders;

  double closed_form_err = 0.0, oracle_err = 0.0, inequality_gap = 0.0;
  for (std::size_t i = 0; i < spec.times.size(); ++i) {
    const double t = spec.times[i];
    try {
      TimeRecord rec;
      rec.time = t;
      const SqrtState xi = evolve(xi0, prop, t);
      const DerivativeStack stack = derivative_stack(xi, p.h, stack_order);
      const MomentTable table = moment_table(stack);
      for (int k = 1; k <= table.max_order(); ++k) rec.moments[2 * k] = table.mu(2 * k);
      rec.closed_form = closed_form_moments(xi, p.h);
      for (int k = 0; k < 3 && k < table.max_order(); ++k) {
        closed_form_err = std::max(closed_form_err, detail::relative(rec.closed_form[static_cast<std::size_t>(k)],
                                                                     table.mu(2 * k + 2)));
      }

      rec.bound = bound_of_order(table, n_max, tol);
      const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(stack, tol);
      for (int n = 1; n <= n_max; n += 2) {
        if (sys.psi_degenerate.at(n)) continue;
        rec.oracle_norms[n] = sys.psi_norms.at(n);
        if (rec.bound.n_values.count(n)) {
          oracle_err = std::max(oracle_err, detail::relative(rec.bound.n_values.at(n), sys.psi_norms.at(n)));
        }
      }

      rec.stats_h = stat_summary(p.h, xi);
      if (p.t_est) {
        rec.stats_t = stat_summary(*p.t_est, xi);
        rec.order1 = order1_product(xi, p.h, *p.t_est);
        rec.diagnostics = p.pair ? conjugation_diagnostics(*p.pair, stack)
                                 : conjugation_diagnostics(*p.t_est, stack);
        if (spec.include_even_order_2) rec.bound.even_order_2 = estimator_term_even(*p.t_est, stack, 2, tol);
        std::vector<int> direct_orders;
        for (int n = 1; n <= stack_order; ++n) {
          if (n % 2 == 1 || (n == 2 && spec.include_even_order_2)) direct_orders.push_back(n);
        }
        rec.direct_bhattacharyya = oracle::direct_bhattacharyya(sys, *p.t_est, xi, direct_orders);
        inequality_gap = std::max(inequality_gap, *rec.direct_bhattacharyya - rec.stats_t->skew_second_kind);
        if (!rec.diagnostics->kappa_per_order.empty() && stack.max_order() >= 1) {
          rec.bound.kappa = rec.diagnostics->kappa_per_order.at(1);
        }
      }
      report.records.push_back(std::move(rec));
    } catch (const Error& e) {
      detail::rethrow_at_time(e, i, t);
    }
  }

  const TimeRecord& first = report.records.front();
  double moment_worst = 0.0;
  for (const auto& [k, v0] : first.moments) {
    double worst = 0.0;
    for (const TimeRecord& r : report.records) worst = std::max(worst, detail::relative(r.moments.at(k), v0));
    report.moment_drift[k] = worst;
    moment_worst = std::max(moment_worst, worst);
  }
  if (p.t_est) {
    std::map<int, double> drift;
    for (const auto& [n, k0] : first.diagnostics->kappa_per_order) {
      const double spread = std::sqrt(std::max(first.stats_t->skew_second_kind, 0.0));
      const double scale = std::max({std::abs(k0), first.moments.at(2 * n) * spread, 1e-300});
      double worst = 0.0;
      for (const TimeRecord& r : report.records) {
        worst = std::max(worst, std::abs(r.diagnostics->kappa_per_order.at(n) - k0));
      }
      drift[n] = worst / scale;
    }
    report.kappa_drift = drift;
  }

  report.checks.push_back({"moment_invariance", moment_worst, 1e-8, moment_worst <= 1e-8});
  report.checks.push_back({"closed_form_moments", closed_form_err, 1e-9, closed_form_err <= 1e-9});
  report.checks.push_back({"oracle_normalizers", oracle_err, 1e-8, oracle_err <= 1e-8});
  if (p.t_est) {
    report.checks.push_back({"bhattacharyya_inequality", inequality_gap, 1e-9, inequality_gap <= 1e-9});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report output.

/// x rounded to `digits` significant decimal digits.
inline double round_significant(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return std::strtod(buf, nullptr);
}

namespace detail {

class ReportWriter {
 public:
  explicit ReportWriter(int digits) : digits_(digits) {}

  double r(double x) const { return round_significant(x, digits_); }

  Json map_json(const std::map<int, double>& m) const {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = r(v);
    return j;
  }

  Json stats(const StatSummary& s) const {
    return {{"mean", r(s.mean)},
            {"variance", r(s.variance)},
            {"delta_sq", r(s.delta_sq)},
            {"wysi", r(s.wysi)},
            {"skew_second_kind", r(s.skew_second_kind)}};
  }

  Json bound(const BoundReport& b) const {
    Json j;
    j["orders"] = b.orders;
    j["D"] = map_json(b.d_values);
    j["N"] = map_json(b.n_values);
    Json f = Json::object();
    for (const auto& [nk, v] : b.f_values) {
      f[std::to_string(nk.first) + "," + std::to_string(nk.second)] = r(v);
    }
    j["F"] = f;
    j["U"] = map_json(b.u_values);
    j["terms"] = map_json(b.terms);
    j["cumulative"] = map_json(b.cumulative);
    j["cumulative_rhs"] = r(b.cumulative_rhs);
    j["degenerate_orders"] = b.degenerate_orders;
    if (b.kappa) j["kappa"] = r(*b.kappa);
    if (b.even_order_2) {
      const EvenTerm& e = *b.even_order_2;
      j["even_order_2"] = {{"value", r(e.value)},
                           {"product_form", r(e.product_form)},
                           {"numerator", r(e.numerator)},
                           {"norm_sq", r(e.norm_sq)},
                           {"degenerate", e.degenerate}};
    }
    return j;
  }

  Json record(const TimeRecord& rec) const {
    Json j;
    j["time"] = r(rec.time);
    j["moments"] = map_json(rec.moments);
    j["closed_form"] = {{"2", r(rec.closed_form[0])}, {"4", r(rec.closed_form[1])}, {"6", r(rec.closed_form[2])}};
    j["oracle_norms"] = map_json(rec.oracle_norms);
    j["bound"] = bound(rec.bound);
    j["stats_h"] = stats(rec.stats_h);
    if (rec.stats_t) j["stats_t"] = stats(*rec.stats_t);
    if (rec.order1) {
      const Order1Product& o = *rec.order1;
      j["order1"] = {{"product", r(o.product)},
                     {"skew_t", r(o.skew_t)},
                     {"wysi_h", r(o.wysi_h)},
                     {"symmetric_lhs", r(o.symmetric_lhs)},
                     {"symmetric_rhs", r(o.symmetric_rhs)}};
    }
    if (rec.diagnostics) {
      const ConjugationDiagnostics& d = *rec.diagnostics;
      Json odd = Json::object();
      for (const auto& [n, c] : d.odd_contraction) {
        odd[std::to_string(n)] = {{"observed", r(c.observed)}, {"predicted", r(c.predicted)}};
      }
      j["diagnostics"] = {{"projection", r(d.projection)},
                          {"kappa", map_json(d.kappa_per_order)},
                          {"odd_contraction", odd},
                          {"defect_weight", r(d.defect_weight)}};
    }
    if (rec.direct_bhattacharyya) j["direct_bhattacharyya"] = r(*rec.direct_bhattacharyya);
    return j;
  }

 private:
  int digits_;
};

}  // namespace detail

inline Json report_to_json(const RunReport& report) {
  const detail::ReportWriter w(report.report_precision);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = report.version;
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(report.spec_fingerprint));
  j["spec_fingerprint"] = fp;
  j["orders"] = report.orders;
  Json recs = Json::array();
  for (const TimeRecord& rec : report.records) recs.push_back(w.record(rec));
  j["records"] = recs;
  j["moment_drift"] = w.map_json(report.moment_drift);
  if (report.kappa_drift) j["kappa_drift"] = w.map_json(*report.kappa_drift);
  Json checks = Json::array();
  for (const Check& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"observed", w.r(c.observed)},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  }
  j["checks"] = checks;
  j["passed"] = report.passed();
  return j;
}

/// One row per time point; values at the declared precision.
inline std::string report_to_csv(const RunReport& report) {
  const int digits = report.report_precision;
  auto fmt = [digits](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::string(buf);
  };
  const TimeRecord& first = report.records.front();
  std::vector<std::string> header{"time"};
  for (const auto& [k, v] : first.moments) header.push_back("mu_" + std::to_string(k));
  for (int n : first.bound.orders) {
    header.push_back("D_" + std::to_string(2 * n));
    header.push_back("U_" + std::to_string(n));
    header.push_back("term_" + std::to_string(n));
  }
  header.push_back("cumulative_rhs");
  header.push_back("degenerate_orders");
  const bool has_t = first.order1.has_value();
  if (has_t) {
    header.insert(header.end(), {"skew_t", "wysi_h", "order1_product", "projection", "direct_bhattacharyya"});
  }
  const bool has_even = first.bound.even_order_2.has_value();
  if (has_even) header.push_back("even_order_2");

  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const TimeRecord& rec : report.records) {
    out << fmt(rec.time);
    for (const auto& [k, v] : rec.moments) out << "," << fmt(v);
    for (int n : rec.bound.orders) {
      out << "," << fmt(rec.bound.d_values.at(2 * n));
      const auto u = rec.bound.u_values.find(n);
      out << "," << (u == rec.bound.u_values.end() ? std::string() : fmt(u->second));
      out << "," << fmt(rec.bound.terms.at(n));
    }
    out << "," << fmt(rec.bound.cumulative_rhs) << ",";
    for (std::size_t k = 0; k < rec.bound.degenerate_orders.size(); ++k) {
      out << (k ? ";" : "") << rec.bound.degenerate_orders[k];
    }
    if (has_t) {
      out << "," << fmt(rec.order1->skew_t) << "," << fmt(rec.order1->wysi_h) << ","
          << fmt(rec.order1->product) << "," << fmt(rec.diagnostics->projection) << ","
          << fmt(*rec.direct_bhattacharyya);
    }
    if (has_even) out << "," << fmt(rec.bound.even_order_2->value);
    out << "\n";
  }
  return out.str();
}

}  // namespace qcrb
