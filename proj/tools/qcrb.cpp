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

// qcrb compute | verify | sample
//
// Exit status: 0 success, 2 bad input (schema, dimensions, arguments),
// 3 numerical abort, 4 a check or property failed.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "qcrb/problem.hpp"
#include "qcrb/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFailed = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + out_path);
  out << text;
}

struct ComputeArgs {
  std::string spec_path, out_path, orders, format = "json";
};

int run_compute_command(const ComputeArgs& a) {
  qcrb::ProblemSpec spec = qcrb::parse_spec(read_file(a.spec_path));
  if (!a.orders.empty()) qcrb::override_orders(spec, qcrb::parse_order_list(a.orders));
  const qcrb::RunReport report = qcrb::run_compute(spec);
  emit(a.format == "csv" ? qcrb::report_to_csv(report) : qcrb::report_to_json(report).dump(2) + "\n",
       a.out_path);
  for (const qcrb::Check& c : report.checks) {
    if (!c.passed) {
      std::cerr << "check failed: " << c.name << " observed " << c.observed << " > " << c.tolerance
                << "\n";
    }
  }
  return report.passed() ? kExitOk : kExitFailed;
}

struct VerifyArgs {
  std::uint64_t seed = 1;
  std::string dims = "2..8";
  int samples = 100;
  double tolerance = 1.0;
};

int run_verify_command(const VerifyArgs& a) {
  const qcrb::SuiteReport r =
      qcrb::run_verify(a.seed, qcrb::parse_dim_range(a.dims), a.samples, a.tolerance);
  std::cout << qcrb::suite_to_json(r).dump(2) << "\n";
  for (const qcrb::PropertyResult& p : r.properties) {
    std::cerr << (p.passed() ? "pass " : "FAIL ") << p.name << " worst " << p.worst << " tol "
              << p.tolerance << " (" << p.checked << " checks)\n";
  }
  return r.passed() ? kExitOk : kExitFailed;
}

struct SampleArgs {
  int dim = 0;
  std::string ensemble;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_sample_command(const SampleArgs& a) {
  qcrb::ComplexMatrix m;
  if (a.ensemble == "gue") {
    m = qcrb::random_hamiltonian(a.dim, a.seed).matrix();
  } else if (a.ensemble == "ginibre") {
    m = qcrb::random_mixed(a.dim, a.seed).matrix();
  } else {
    m = qcrb::random_pure(a.dim, a.seed).matrix();
  }
  qcrb::Json doc;
  doc["schema_version"] = qcrb::kSchemaVersion;
  doc["ensemble"] = a.ensemble;
  doc["seed"] = a.seed;
  doc["dimension"] = a.dim;
  doc["matrix"] = qcrb::matrix_to_json(m);
  emit(doc.dump(2) + "\n", a.out_path);
  return kExitOk;
}

int exit_code_for(const qcrb::Error& e) {
  return e.is_numerical() ? kExitNumerical : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Cramer-Rao bounds for mixed states under unitary dynamics"};
  app.set_version_flag("--version", std::string(qcrb::kVersion));
  app.require_subcommand(1);

  ComputeArgs compute;
  CLI::App* c = app.add_subcommand("compute", "Evaluate the bounds for a problem document");
  c->add_option("--spec", compute.spec_path, "Problem document (JSON)")->required();
  c->add_option("--out", compute.out_path, "Write the report here instead of stdout");
  c->add_option("--orders", compute.orders, "Override the order list, e.g. 1,3,5");
  c->add_option("--format", compute.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  VerifyArgs verify;
  CLI::App* v = app.add_subcommand("verify", "Run the randomized invariant suite");
  v->add_option("--seed", verify.seed, "Suite seed")->capture_default_str();
  v->add_option("--dims", verify.dims, "Dimensions, 2..8 or 2,4,6")->capture_default_str();
  v->add_option("--samples", verify.samples, "Instances per dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  v->add_option("--tolerance", verify.tolerance, "Multiplier on every native tolerance")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  SampleArgs sample;
  CLI::App* s = app.add_subcommand("sample", "Draw a matrix from a random ensemble");
  s->add_option("--dim", sample.dim, "Dimension")->required()->check(CLI::Range(2, 256));
  s->add_option("--ensemble", sample.ensemble, "gue, ginibre or pure_haar")
      ->required()
      ->check(CLI::IsMember({"gue", "ginibre", "pure_haar"}));
  s->add_option("--seed", sample.seed, "Ensemble seed")->required();
  s->add_option("--out", sample.out_path, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c) return run_compute_command(compute);
    if (*v) return run_verify_command(verify);
    return run_sample_command(sample);
  } catch (const qcrb::Error& e) {
    std::cerr << "qcrb: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const IoError& e) {
    std::cerr << "qcrb: " << e.what() << "\n";
    return kExitInput;
  }
}
