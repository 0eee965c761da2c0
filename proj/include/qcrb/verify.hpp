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

// Randomized invariant suite behind `qcrb verify`.
//
// Every property reduces an instance to a non-negative deviation and is
// judged against native_tolerance * multiplier, so multiplier 0 demands
// exact arithmetic and fails. Instances are drawn from (seed, dim, sample)
// alone, so the body of the report is reproducible bit for bit.

#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "qcrb/problem.hpp"

namespace qcrb {

struct PropertyResult {
  std::string name;
  double native_tolerance = 0.0;
  double tolerance = 0.0;
  double worst = 0.0;
  int worst_dim = 0;
  int worst_sample = -1;
  long checked = 0;
  long failures = 0;

  bool passed() const { return failures == 0; }
  double margin() const { return tolerance - worst; }
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<int> dims;
  int samples = 0;
  double multiplier = 1.0;
  std::vector<PropertyResult> properties;
  double elapsed_seconds = 0.0;  // meta, excluded from body_json

  bool passed() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.passed(); });
  }

  const PropertyResult& property(const std::string& name) const {
    for (const PropertyResult& p : properties) {
      if (p.name == name) return p;
    }
    throw InvalidArgument("no property named " + name);
  }
};

/// "2..8" or "2,3,5".
inline std::vector<int> parse_dim_range(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&text](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InvalidArgument("cannot parse dims '" + text + "'");
    return v;
  };
  const std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots));
    const int hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw InvalidArgument("empty dims range '" + text + "'");
    for (int d = lo; d <= hi; ++d) out.push_back(d);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  }
  if (out.empty()) throw InvalidArgument("no dims given");
  for (int d : out) {
    if (d < 2 || d > 64) throw InvalidArgument("dims must lie in 2..64");
  }
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t instance_seed(std::uint64_t seed, int dim, int sample, int stream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ std::uint64_t(dim)) ^
                    (std::uint64_t(sample) << 8 | std::uint64_t(stream)));
}

inline double rel_dev(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

class Tally {
 public:
  Tally(double multiplier) : multiplier_(multiplier) {}

  void add(const std::string& name, double native, double deviation, int dim, int sample) {
    PropertyResult& p = slot(name, native);
    ++p.checked;
    const double dev = std::isnan(deviation) ? std::numeric_limits<double>::infinity() : deviation;
    if (dev > p.tolerance) ++p.failures;
    if (dev > p.worst || p.worst_sample < 0) {
      p.worst = std::max(p.worst, dev);
      p.worst_dim = dim;
      p.worst_sample = sample;
    }
  }

  std::vector<PropertyResult> take() { return std::move(results_); }

 private:
  PropertyResult& slot(const std::string& name, double native) {
    for (PropertyResult& p : results_) {
      if (p.name == name) return p;
    }
    PropertyResult p;
    p.name = name;
    p.native_tolerance = native;
    p.tolerance = native * multiplier_;
    results_.push_back(p);
    return results_.back();
  }

  double multiplier_;
  std::vector<PropertyResult> results_;
};

inline void check_instance(Tally& tally, std::uint64_t seed, int dim, int sample) {
  const int n_max = 7;
  const DensityMatrix rho = random_mixed(dim, instance_seed(seed, dim, sample, 0));
  const HermitianOperator h = random_hamiltonian(dim, instance_seed(seed, dim, sample, 1));
  const HermitianOperator t_est = random_hamiltonian(dim, instance_seed(seed, dim, sample, 2));
  const SqrtState xi = sqrt_embed(rho);
  auto add = [&](const char* name, double native, double dev) { tally.add(name, native, dev, dim, sample); };

  // Embedding and dynamics.
  add("sqrt_squares_to_rho", 1e-10, max_abs_entry(xi.rho() - rho.matrix()));
  const UnitaryPropagator prop(h);
  const SqrtState later = evolve(xi, prop, 0.4);
  const ComplexMatrix rt = later.rho();
  add("purity_preserved", 1e-10, std::abs(real_trace_product(rt, rt) - rho.purity()));

  // Statistics.
  const StatSummary sh = stat_summary(h, xi);
  const StatSummary st = stat_summary(t_est, xi);
  add("wysi_dual_formula", 1e-10, std::abs(sh.wysi - sh.wysi_commutator));
  add("wysi_dual_formula", 1e-10, std::abs(st.wysi - st.wysi_commutator));

  // Moments.
  const DerivativeStack stack = derivative_stack(xi, h, n_max);
  const MomentTable table = moment_table(stack);
  add("mu2_twice_wysi", 1e-10, std::abs(table.mu(2) - 2.0 * sh.wysi));
  const auto cf = closed_form_moments(xi, h);
  for (int k = 0; k < 3; ++k) add("closed_form_moments", 1e-9, rel_dev(cf[std::size_t(k)], table.mu(2 * k + 2)));
  for (int n = 0; n < 6; ++n) add("consecutive_orthogonality", 1e-10, std::abs(table.cross(n, n + 1)));
  for (int r = 0; r <= n_max; ++r) {
    for (int s = r + 1; s <= n_max; ++s) {
      if ((r + s) % 2 == 1) {
        add("sign_law", 1e-10, std::abs(table.cross(r, s)) / std::max(1.0, table.mu(r + s - 1)));
      } else if ((r + s) / 2 <= n_max) {
        const double sign = ((s - r) / 2) % 2 == 0 ? 1.0 : -1.0;
        add("sign_law", 1e-9, rel_dev(table.cross(r, s), sign * table.mu(r + s), 1e-14));
      }
    }
  }
  for (double t : {0.4, 1.1}) {
    const MomentTable later_table = moment_table(derivative_stack(evolve(xi, prop, t), h, n_max));
    for (int k = 1; k <= n_max; ++k) add("moment_invariance", 1e-8, rel_dev(table.mu(2 * k), later_table.mu(2 * k)));
  }

  // Determinant route against the oracle.
  const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(stack);
  for (int n = 1; n <= n_max; n += 2) {
    add("gram_nonnegative", 1e-9, std::max(0.0, -gram_determinant(table, n) / gram_scale(table, n)));
    const bool degenerate = is_degenerate_order(table, n);
    add("degeneracy_classification", 0.5, degenerate == oracle::psi_is_degenerate(sys, n) ? 0.0 : 1.0);
    if (degenerate || oracle::psi_is_degenerate(sys, n)) continue;
    add("normalizer_vs_oracle", 1e-8, rel_dev(normalizer(table, n), sys.psi_norms.at(n)));
    for (int k = 1; k < n; k += 2) {
      add("projection_vs_oracle", 1e-8, rel_dev(projection_coeff(table, n, k), oracle::psi_projection(sys, n, k)));
    }
  }

  // Bound.
  if (!is_degenerate_order(table, 3)) {
    const double m2 = table.mu(2), m4 = table.mu(4), m6 = table.mu(6);
    const double num = m4 - 3 * m2 * m2;
    const double closed = 0.25 * (1.0 + num * num / (m6 * m2 - m4 * m4));
    add("third_order_closed_form", 1e-10, rel_dev(bound_of_order(table, 3).cumulative_rhs, closed));
  }
  double prev = 0.0;
  for (int n = 1; n <= n_max; n += 2) {
    const double v = bound_of_order(table, n).cumulative_rhs;
    add("monotone_in_order", 1e-12, std::max(0.0, prev - v));
    prev = v;
  }

  // Estimator-dependent inequality and its exact complement.
  const std::vector<int> orders{1, 2, 3, 4, 5};
  const double direct = oracle::direct_bhattacharyya(sys, t_est, xi, orders);
  add("bhattacharyya_inequality", 1e-9, std::max(0.0, direct - st.skew_second_kind));
  const oracle::MinVarianceResult mv = oracle::min_variance_oracle(sys, t_est, xi, orders);
  add("min_variance_identity", 1e-10, std::abs(mv.min_variance - 2.0 * (st.skew_second_kind - direct)));
  const EvenTerm even = estimator_term_even(t_est, stack);
  if (!even.degenerate && !sys.degenerate[2]) {
    const double c = oracle::gradient_vector(t_est, xi).dot(sys.hat_real[2]);
    add("even_term_vs_oracle", 1e-8, rel_dev(even.value, 0.5 * c * c / sys.norms[2], 1e-14));
  }
}

}  // namespace detail

inline SuiteReport run_verify(std::uint64_t seed, const std::vector<int>& dims, int samples,
                              double multiplier) {
  if (samples < 1) throw InvalidArgument("verify: samples must be >= 1");
  if (!(multiplier >= 0.0) || !std::isfinite(multiplier)) {
    throw InvalidArgument("verify: tolerance multiplier must be finite and >= 0");
  }
  if (dims.empty()) throw InvalidArgument("verify: no dims");
  const auto start = std::chrono::steady_clock::now();
  SuiteReport report;
  report.seed = seed;
  report.dims = dims;
  report.samples = samples;
  report.multiplier = multiplier;
  detail::Tally tally(multiplier);
  for (int dim : dims) {
    for (int s = 0; s < samples; ++s) detail::check_instance(tally, seed, dim, s);
  }
  report.properties = tally.take();
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// The deterministic part of the report.
inline Json suite_body_json(const SuiteReport& r) {
  Json props = Json::array();
  for (const PropertyResult& p : r.properties) {
    props.push_back({{"name", p.name},
                     {"passed", p.passed()},
                     {"checked", p.checked},
                     {"failures", p.failures},
                     {"worst", p.worst},
                     {"tolerance", p.tolerance},
                     {"margin", p.margin()},
                     {"worst_instance", {{"dim", p.worst_dim}, {"sample", p.worst_sample}}}});
  }
  return {{"schema_version", kSchemaVersion},
          {"seed", r.seed},
          {"dims", r.dims},
          {"samples", r.samples},
          {"tolerance_multiplier", r.multiplier},
          {"passed", r.passed()},
          {"properties", props}};
}

inline Json suite_to_json(const SuiteReport& r) {
  return {{"body", suite_body_json(r)},
          {"meta", {{"version", kVersion}, {"elapsed_seconds", r.elapsed_seconds}}}};
}

}  // namespace qcrb
