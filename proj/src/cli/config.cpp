// Copyright 2026 The ErgoRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ergorisk/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergorisk/errors.hpp"

namespace ergorisk::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

// Tracks which keys of an object were consumed so that leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error("'" + path_ + "' must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) {
        config_error("unknown key '" + path(it.key()) + "'");
      }
    }
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) config_error("'" + path(key) + "' must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) config_error("'" + path(key) + "' must be finite");
    return x;
  }

  long integer(const std::string& key, long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      config_error("'" + path(key) + "' must be an integer");
    }
    return v->get<long>();
  }

  std::uint64_t unsigned_integer(const std::string& key,
                                 std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) {
      config_error("'" + path(key) + "' must be a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) config_error("'" + path(key) + "' must be a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) config_error("'" + path(key) + "' must be a string");
    return v->get<std::string>();
  }

  std::optional<Matrix> matrix(const std::string& key);
  std::optional<Vector> vector(const std::string& key);

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

[[noreturn]] void shape_error(const std::string& field,
                              const std::string& what) {
  throw Error(ErrorCode::kShape, "field '" + field + "': " + what);
}

double matrix_entry(const json& v, const std::string& field) {
  if (!v.is_number()) shape_error(field, "entries must be numbers");
  const double x = v.get<double>();
  if (!std::isfinite(x)) shape_error(field, "entries must be finite");
  return x;
}

std::optional<Matrix> Section::matrix(const std::string& key) {
  const json* v = find(key);
  if (!v) return std::nullopt;
  const std::string field = path(key);
  if (v->is_number()) return Matrix::Constant(1, 1, matrix_entry(*v, field));
  if (!v->is_array() || v->empty()) {
    shape_error(field, "expected a non-empty array of rows");
  }
  const std::size_t rows = v->size();
  if (!(*v)[0].is_array() || (*v)[0].empty()) {
    shape_error(field, "row 0 must be a non-empty array");
  }
  const std::size_t cols = (*v)[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = (*v)[i];
    if (!row.is_array() || row.size() != cols) {
      shape_error(field, "row " + std::to_string(i) + " has " +
                             std::to_string(row.is_array() ? row.size() : 0) +
                             " entries, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          matrix_entry(row[j], field);
    }
  }
  return m;
}

std::optional<Vector> Section::vector(const std::string& key) {
  const json* v = find(key);
  if (!v) return std::nullopt;
  const std::string field = path(key);
  if (!v->is_array() || v->empty()) shape_error(field, "expected an array");
  Vector out(static_cast<Eigen::Index>(v->size()));
  for (std::size_t i = 0; i < v->size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = matrix_entry((*v)[i], field);
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void expect_shape(const std::optional<Matrix>& m, Eigen::Index rows,
                  Eigen::Index cols, const std::string& field) {
  if (!m) return;
  if (m->rows() != rows || m->cols() != cols) {
    shape_error(field, "expected " + std::to_string(rows) + "x" +
                           std::to_string(cols) + ", got " +
                           std::to_string(m->rows()) + "x" +
                           std::to_string(m->cols()));
  }
}

struct Dims {
  Eigen::Index n, m, d;
};

Dims dimensions(const ExperimentConfig& c) {
  if (c.system.generator) {
    return {c.system.generator->n, c.system.generator->m,
            c.system.generator->d};
  }
  return {c.system.a->rows(), c.system.b->cols(), c.system.h->cols()};
}

void validate_shapes(const ExperimentConfig& c) {
  if (!c.system.generator) {
    const Matrix& a = *c.system.a;
    if (a.rows() != a.cols()) {
      shape_error("system.A", "must be square, got " +
                                  std::to_string(a.rows()) + "x" +
                                  std::to_string(a.cols()));
    }
    if (c.system.b->rows() != a.rows()) {
      shape_error("system.B", "must have " + std::to_string(a.rows()) +
                                  " rows, got " +
                                  std::to_string(c.system.b->rows()));
    }
    if (c.system.h->rows() != a.rows()) {
      shape_error("system.H", "must have " + std::to_string(a.rows()) +
                                  " rows, got " +
                                  std::to_string(c.system.h->rows()));
    }
  }
  const Dims dims = dimensions(c);
  expect_shape(c.noise.sigma_w, dims.d, dims.d, "noise.sigma_w");
  if (c.noise.samples && c.noise.samples->cols() != dims.d) {
    shape_error("noise.samples", "must have " + std::to_string(dims.d) +
                                     " columns, got " +
                                     std::to_string(c.noise.samples->cols()));
  }
  expect_shape(c.cost.q, dims.n, dims.n, "cost.Q");
  expect_shape(c.cost.r, dims.m, dims.m, "cost.R");
  expect_shape(c.risk.qc, dims.n, dims.n, "risk.Qc");
  expect_shape(c.risk.rc, dims.m, dims.m, "risk.Rc");
  expect_shape(c.gain.k, dims.m, dims.n, "gain.K");
  if (c.schedule.direction && c.schedule.direction->size() != dims.n) {
    shape_error("schedule.direction",
                "must have " + std::to_string(dims.n) + " entries, got " +
                    std::to_string(c.schedule.direction->size()));
  }
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "student_t") return NoiseKind::kStudentT;
  if (s == "empirical") return NoiseKind::kEmpirical;
  config_error("noise.kind must be gaussian, student_t or empirical, got '" +
               s + "'");
}

GainSource parse_gain_source(const std::string& s) {
  if (s == "lqr") return GainSource::kLqr;
  if (s == "solved") return GainSource::kSolved;
  if (s == "explicit") return GainSource::kExplicit;
  config_error("gain.source must be lqr, solved or explicit, got '" + s + "'");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::kJson;
  if (s == "csv") return OutputFormat::kCsv;
  config_error("output.format must be json or csv, got '" + s + "'");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Matrix or_identity(const std::optional<Matrix>& m, Eigen::Index n) {
  return m ? *m : Matrix(Matrix::Identity(n, n));
}

}  // namespace

std::string to_string(GainSource source) {
  switch (source) {
    case GainSource::kLqr: return "lqr";
    case GainSource::kSolved: return "solved";
    case GainSource::kExplicit: return "explicit";
  }
  return "unknown";
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

ExperimentConfig parse_config(const json& document) {
  ExperimentConfig c;
  Section root(document, "");
  c.seed = root.unsigned_integer("seed", 0);
  c.description = root.string("description", "");

  if (const json* node = root.find("system")) {
    Section s(*node, "system");
    c.system.a = s.matrix("A");
    c.system.b = s.matrix("B");
    c.system.h = s.matrix("H");
    if (const json* g = s.find("generator")) {
      Section gs(*g, "system.generator");
      GeneratorSpec spec;
      spec.n = static_cast<int>(gs.integer("n", spec.n));
      spec.m = static_cast<int>(gs.integer("m", spec.m));
      spec.d = static_cast<int>(gs.integer("d", spec.n));
      spec.rho_target = gs.number("rho_target", spec.rho_target);
      spec.seed = gs.unsigned_integer("seed", spec.seed);
      gs.finish();
      if (spec.n < 1 || spec.m < 1 || spec.d < spec.n) {
        config_error("system.generator needs n, m >= 1 and d >= n");
      }
      if (!(spec.rho_target > 0.0 && spec.rho_target < 1.0)) {
        config_error("system.generator.rho_target must lie in (0, 1)");
      }
      c.system.generator = spec;
    }
    s.finish();
  }
  const bool inline_any = c.system.a || c.system.b || c.system.h;
  const bool inline_all = c.system.a && c.system.b && c.system.h;
  if (c.system.generator ? inline_any : !inline_all) {
    config_error(
        "system needs either all of A, B, H or a generator section, not both");
  }

  if (const json* node = root.find("noise")) {
    Section s(*node, "noise");
    c.noise.kind = parse_noise_kind(s.string("kind", "gaussian"));
    c.noise.nu = s.number("nu", 0.0);
    c.noise.sigma_w = s.matrix("sigma_w");
    c.noise.samples = s.matrix("samples");
    s.finish();
    if (c.noise.kind == NoiseKind::kStudentT && c.noise.nu == 0.0) {
      config_error("noise.nu is required for student_t noise");
    }
    if ((c.noise.kind == NoiseKind::kEmpirical) != c.noise.samples.has_value()) {
      config_error("noise.samples is required for, and only for, empirical "
                   "noise");
    }
  }

  if (const json* node = root.find("cost")) {
    Section s(*node, "cost");
    c.cost.q = s.matrix("Q");
    c.cost.r = s.matrix("R");
    s.finish();
  }

  if (const json* node = root.find("risk")) {
    Section s(*node, "risk");
    c.risk.qc = s.matrix("Qc");
    c.risk.rc = s.matrix("Rc");
    if (const json* b = s.find("beta_bar")) {
      Section bs(*b, "risk.beta_bar");
      const json* ratio = bs.find("ratio");
      const json* absolute = bs.find("absolute");
      if ((ratio != nullptr) == (absolute != nullptr)) {
        config_error("risk.beta_bar needs exactly one of ratio or absolute");
      }
      c.risk.beta_bar.mode = ratio ? BetaBarSpec::Mode::kRatio
                                   : BetaBarSpec::Mode::kAbsolute;
      c.risk.beta_bar.value = bs.number(ratio ? "ratio" : "absolute", 0.0);
      bs.finish();
      if (!(c.risk.beta_bar.value > 0.0)) {
        config_error("risk.beta_bar must be positive");
      }
    }
    s.finish();
  }

  if (const json* node = root.find("schedule")) {
    Section s(*node, "schedule");
    c.schedule.enabled = s.boolean("enabled", c.schedule.enabled);
    c.schedule.period = static_cast<int>(s.integer("period", c.schedule.period));
    c.schedule.magnitude = s.number("magnitude", c.schedule.magnitude);
    c.schedule.direction = s.vector("direction");
    s.finish();
    if (c.schedule.period < 1) config_error("schedule.period must be >= 1");
    if (c.schedule.direction && c.schedule.direction->norm() == 0.0) {
      config_error("schedule.direction must be nonzero");
    }
  }

  if (const json* node = root.find("solver")) {
    Section s(*node, "solver");
    c.solver.eps = s.number("eps", c.solver.eps);
    c.solver.outer_cap = s.integer("outer_cap", c.solver.outer_cap);
    c.solver.inner_cap = static_cast<int>(s.integer("inner_cap", c.solver.inner_cap));
    c.solver.tol_b_rel = s.number("tol_b_rel", c.solver.tol_b_rel);
    c.solver.lambda0 = s.number("lambda0", c.solver.lambda0);
    s.finish();
    if (!(c.solver.eps > 0.0) || c.solver.outer_cap < 0 ||
        c.solver.inner_cap < 1 || !(c.solver.tol_b_rel > 0.0) ||
        !(c.solver.lambda0 >= 0.0)) {
      config_error("solver needs eps > 0, outer_cap >= 0, inner_cap >= 1, "
                   "tol_b_rel > 0, lambda0 >= 0");
    }
  }

  if (const json* node = root.find("simulation")) {
    Section s(*node, "simulation");
    c.simulation.horizon = s.integer("horizon", c.simulation.horizon);
    c.simulation.rollouts =
        static_cast<int>(s.integer("rollouts", c.simulation.rollouts));
    c.simulation.burn_in = s.boolean("burn_in", c.simulation.burn_in);
    c.simulation.burn_in_steps =
        s.integer("burn_in_steps", c.simulation.burn_in_steps);
    c.simulation.trace_stride =
        s.integer("trace_stride", c.simulation.trace_stride);
    s.finish();
    if (c.simulation.horizon < 1 || c.simulation.rollouts < 1 ||
        c.simulation.burn_in_steps < -1 || c.simulation.trace_stride < 0) {
      config_error("simulation needs horizon >= 1, rollouts >= 1, "
                   "burn_in_steps >= -1, trace_stride >= 0");
    }
  }

  if (const json* node = root.find("gain")) {
    Section s(*node, "gain");
    c.gain.source = parse_gain_source(s.string("source", "solved"));
    c.gain.k = s.matrix("K");
    s.finish();
    if ((c.gain.source == GainSource::kExplicit) != c.gain.k.has_value()) {
      config_error("gain.K is required for, and only for, source 'explicit'");
    }
  }

  if (const json* node = root.find("output")) {
    Section s(*node, "output");
    c.output.dir = s.string("dir", c.output.dir);
    c.output.format = parse_format(s.string("format", "json"));
    s.finish();
  }

  root.finish();
  validate_shapes(c);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(document);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  if (!c.description.empty()) j["description"] = c.description;

  json system = json::object();
  if (c.system.generator) {
    const GeneratorSpec& g = *c.system.generator;
    system["generator"] = {{"n", g.n},
                           {"m", g.m},
                           {"d", g.d},
                           {"rho_target", g.rho_target},
                           {"seed", g.seed}};
  } else {
    system["A"] = matrix_json(*c.system.a);
    system["B"] = matrix_json(*c.system.b);
    system["H"] = matrix_json(*c.system.h);
  }
  j["system"] = std::move(system);

  const Dims dims = dimensions(c);
  json noise = {{"kind", std::string(to_string(c.noise.kind))},
                {"sigma_w", matrix_json(or_identity(c.noise.sigma_w, dims.d))}};
  if (c.noise.kind == NoiseKind::kStudentT) noise["nu"] = c.noise.nu;
  if (c.noise.samples) noise["samples"] = matrix_json(*c.noise.samples);
  j["noise"] = std::move(noise);

  j["cost"] = {{"Q", matrix_json(or_identity(c.cost.q, dims.n))},
               {"R", matrix_json(or_identity(c.cost.r, dims.m))}};

  const bool ratio = c.risk.beta_bar.mode == BetaBarSpec::Mode::kRatio;
  j["risk"] = {
      {"Qc", matrix_json(or_identity(c.risk.qc, dims.n))},
      {"Rc", matrix_json(c.risk.rc ? *c.risk.rc
                                   : Matrix(Matrix::Zero(dims.m, dims.m)))},
      {"beta_bar", {{ratio ? "ratio" : "absolute", c.risk.beta_bar.value}}}};

  json schedule = {{"enabled", c.schedule.enabled},
                   {"period", c.schedule.period},
                   {"magnitude", c.schedule.magnitude}};
  schedule["direction"] = vector_json(
      c.schedule.direction ? *c.schedule.direction
                           : Vector(Vector::Unit(dims.n, 0)));
  j["schedule"] = std::move(schedule);

  j["solver"] = {{"eps", c.solver.eps},
                 {"outer_cap", c.solver.outer_cap},
                 {"inner_cap", c.solver.inner_cap},
                 {"tol_b_rel", c.solver.tol_b_rel},
                 {"lambda0", c.solver.lambda0}};
  j["simulation"] = {{"horizon", c.simulation.horizon},
                     {"rollouts", c.simulation.rollouts},
                     {"burn_in", c.simulation.burn_in},
                     {"burn_in_steps", c.simulation.burn_in_steps},
                     {"trace_stride", c.simulation.trace_stride}};
  json gain = {{"source", to_string(c.gain.source)}};
  if (c.gain.k) gain["K"] = matrix_json(*c.gain.k);
  j["gain"] = std::move(gain);
  j["output"] = {{"dir", c.output.dir},
                 {"format", to_string(c.output.format)}};
  return j;
}

std::string serialize_config(const ExperimentConfig& config) {
  return to_json(config).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

LinearSystem build_system(const ExperimentConfig& c) {
  const Dims dims = dimensions(c);
  const Matrix sigma_w = or_identity(c.noise.sigma_w, dims.d);
  NoiseModel noise = [&] {
    switch (c.noise.kind) {
      case NoiseKind::kStudentT: return NoiseModel::student_t(c.noise.nu, sigma_w);
      case NoiseKind::kEmpirical:
        return NoiseModel::empirical(*c.noise.samples, sigma_w);
      case NoiseKind::kGaussian: break;
    }
    return NoiseModel::gaussian(sigma_w);
  }();
  if (c.system.generator) {
    const GeneratorSpec& g = *c.system.generator;
    Rng rng(g.seed);
    return random_stabilizable_system(g.n, g.m, g.d, rng, g.rho_target)
        .with_noise(std::move(noise));
  }
  return LinearSystem(*c.system.a, *c.system.b, *c.system.h, std::move(noise));
}

ControlProblem build_problem(const ExperimentConfig& c) {
  LinearSystem sys = build_system(c);
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.input_dim();
  CostSpec cost{or_identity(c.cost.q, n), or_identity(c.cost.r, m)};
  validate_cost(sys, cost);
  RiskFunctional risk{or_identity(c.risk.qc, n),
                      c.risk.rc ? *c.risk.rc : Matrix(Matrix::Zero(m, m))};
  validate_risk(sys, risk);
  return ControlProblem{std::move(sys), std::move(cost), std::move(risk)};
}

PdConfig build_pd_config(const ExperimentConfig& c, double beta_bar) {
  PdConfig pd;
  pd.beta_bar = beta_bar;
  pd.eps = c.solver.eps;
  pd.outer_cap = c.solver.outer_cap;
  pd.inner_max_iterations = c.solver.inner_cap;
  pd.tol_b_rel = c.solver.tol_b_rel;
  pd.lambda0 = c.solver.lambda0;
  return pd;
}

DisturbanceSchedule build_schedule(const ExperimentConfig& c,
                                   Eigen::Index state_dim) {
  if (!c.schedule.enabled) return DisturbanceSchedule::disabled();
  const Vector dir = c.schedule.direction
                         ? *c.schedule.direction
                         : Vector(Vector::Unit(state_dim, 0));
  return DisturbanceSchedule::every(c.schedule.period, c.schedule.magnitude,
                                    dir);
}

double resolve_beta_bar(const ExperimentConfig& c,
                        const ControlProblem& problem) {
  if (c.risk.beta_bar.mode == BetaBarSpec::Mode::kAbsolute) {
    return c.risk.beta_bar.value;
  }
  const Matrix k = lqr_solve(problem.sys, problem.cost);
  return c.risk.beta_bar.value * gamma_n_analytic(problem.sys, k, problem.risk);
}

std::vector<AssumptionCheck> check_assumptions(const ExperimentConfig& c) {
  std::vector<AssumptionCheck> out;
  auto add = [&](std::string id, std::string description, bool passed,
                 std::string detail) {
    out.push_back({std::move(id), std::move(description), passed,
                   std::move(detail)});
  };

  // Raw matrices; the generator already enforces its own guarantees.
  Matrix a, b, h;
  if (c.system.generator) {
    const GeneratorSpec& g = *c.system.generator;
    Rng rng(g.seed);
    const LinearSystem s =
        random_stabilizable_system(g.n, g.m, g.d, rng, g.rho_target);
    a = s.a();
    b = s.b();
    h = s.h();
  } else {
    a = *c.system.a;
    b = *c.system.b;
    h = *c.system.h;
  }
  const Dims dims = dimensions(c);
  const Matrix sigma_w = or_identity(c.noise.sigma_w, dims.d);
  const Matrix q = or_identity(c.cost.q, dims.n);
  const Matrix r = or_identity(c.cost.r, dims.m);
  const Matrix qc = or_identity(c.risk.qc, dims.n);
  const Matrix rc = c.risk.rc ? *c.risk.rc : Matrix(Matrix::Zero(dims.m, dims.m));

  {
    bool ok = is_symmetric(sigma_w) && is_positive_definite(sigma_w);
    std::string detail = ok ? "Sigma_W is positive definite"
                            : "Sigma_W must be symmetric positive definite";
    if (ok && c.noise.kind == NoiseKind::kStudentT && !(c.noise.nu > 4.0)) {
      ok = false;
      detail = "student_t needs nu > 4 for a finite fourth moment, got nu = " +
               std::to_string(c.noise.nu);
    } else if (ok && c.noise.kind == NoiseKind::kEmpirical) {
      detail += "; empirical law has no density, moments are exact averages";
    }
    add("A1", "zero-mean i.i.d. noise with Sigma_W > 0 and finite fourth moment",
        ok, detail);
  }
  const bool stabilizable = is_stabilizable(a, b);
  add("A2", "(A, B) stabilizable", stabilizable,
      stabilizable ? "PBH test passed"
                   : "an unstable mode is not reachable from B");
  const bool q_pd = is_symmetric(q) && is_positive_definite(q);
  const bool h_rank = numerical_rank(h) == a.rows();
  add("A3", "Q > 0 and H full row rank", q_pd && h_rank,
      std::string(q_pd ? "Q > 0" : "Q is not positive definite") + ", " +
          (h_rank ? "rank(H) = n" : "H is rank deficient"));
  const bool r_pd = is_symmetric(r) && is_positive_definite(r);
  add("R", "R > 0", r_pd, r_pd ? "R > 0" : "R is not positive definite");
  const bool qc_psd = is_symmetric(qc) && is_positive_semidefinite(qc);
  add("Qc", "Qc >= 0", qc_psd,
      qc_psd ? "Qc >= 0" : "Qc is not positive semidefinite");
  const bool rc_zero = rc.norm() == 0.0;
  add("Rc", "Rc = 0 (required by the primal-dual solver)", rc_zero,
      rc_zero ? "Rc = 0" : "Rc is nonzero");

  if (!(out[0].passed && stabilizable && q_pd && h_rank && r_pd && qc_psd)) {
    add("CTRL", "(A + B K_LQR, H) controllable", false,
        "not evaluated: prerequisite checks failed");
    add("A4", "Slater: some stabilizing K has gamma_N^2(K) < beta_bar", false,
        "not evaluated: prerequisite checks failed");
    return out;
  }
  const ControlProblem problem = build_problem(c);
  const Matrix k = lqr_solve(problem.sys, problem.cost);
  const bool ctrl = is_controllable(problem.sys.closed_loop(k), problem.sys.h());
  add("CTRL", "(A + B K_LQR, H) controllable", ctrl,
      ctrl ? "controllability matrix has full rank" : "rank deficient");
  if (!ctrl || !rc_zero) {
    add("A4", "Slater: some stabilizing K has gamma_N^2(K) < beta_bar", false,
        "not evaluated: prerequisite checks failed");
    return out;
  }
  const double beta_bar = resolve_beta_bar(c, problem);
  const SlaterReport slater =
      check_slater(problem, beta_bar, {c.solver.eps, c.solver.inner_cap});
  const bool feasible = slater.status == SlaterStatus::kStrictlyFeasible;
  std::ostringstream detail;
  detail << to_string(slater.status) << ": beta_bar = " << beta_bar
         << ", best gamma_N^2 found = " << slater.best_gamma;
  add("A4", "Slater: some stabilizing K has gamma_N^2(K) < beta_bar", feasible,
      detail.str());
  return out;
}

}  // namespace ergorisk::cli
