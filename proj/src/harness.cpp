#include "klprox/harness.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "klprox/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace klprox {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

json config_to_json(const SolverConfig& c) {
  return json{{"epsilon", c.epsilon}, {"b", c.b},         {"q", c.q},
              {"tau", c.tau},         {"L_min", c.L_min}, {"L_max", c.L_max},
              {"delta", c.delta},     {"max_outer", c.max_outer},
              {"max_inner", c.max_inner}, {"max_j", c.max_j}};
}

SolverConfig config_from_json(const json& j) {
  SolverConfig c;
  c.epsilon = j.value("epsilon", c.epsilon);
  c.b = j.value("b", c.b);
  c.q = j.value("q", c.q);
  c.tau = j.value("tau", c.tau);
  c.L_min = j.value("L_min", c.L_min);
  c.L_max = j.value("L_max", c.L_max);
  c.delta = j.value("delta", c.delta);
  c.max_outer = j.value("max_outer", c.max_outer);
  c.max_inner = j.value("max_inner", c.max_inner);
  c.max_j = j.value("max_j", c.max_j);
  return c;
}

constexpr char kCsvHeader[] =
    "k,F,step_norm,L_k,j_k,cert_norm,prox_residual,inner_iters";
constexpr char kVectorMagic[5] = {'K', 'L', 'P', 'X', '1'};

fs::path sidecar_path(const fs::path& csv_path, const char* ext) {
  fs::path p = csv_path;
  p.replace_extension(ext);
  return p;
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

}  // namespace

DataSet gen_logistic_data(int n, int dim, std::uint64_t seed,
                          int sparsity_of_truth) {
  if (n < 1 || dim < 1) throw std::invalid_argument("gen_logistic_data: sizes must be >= 1");
  if (sparsity_of_truth < 0 || sparsity_of_truth > dim) {
    throw std::invalid_argument("gen_logistic_data: bad sparsity");
  }
  Xoshiro256 rng(seed);
  Matrix A(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) A(i, j) = rng.normal();
  }
  Vector truth = Vector::Zero(dim);
  for (int j = 0; j < sparsity_of_truth; ++j) truth[j] = rng.normal();
  Vector labels(n);
  for (int i = 0; i < n; ++i) {
    const double score = A.row(i).dot(truth) + 0.1 * rng.normal();
    labels[i] = score < 0.0 ? -1.0 : 1.0;
  }
  return DataSet{std::move(A), std::move(labels)};
}

DataSet gen_least_squares_data(int n, int dim, std::uint64_t seed,
                               double noise_sigma, int support) {
  if (n < 1 || dim < 1) throw std::invalid_argument("gen_least_squares_data: sizes must be >= 1");
  if (support < 0 || support > dim) {
    throw std::invalid_argument("gen_least_squares_data: bad support size");
  }
  Xoshiro256 rng(seed);
  Matrix A(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) A(i, j) = rng.normal();
  }
  Vector truth = Vector::Zero(dim);
  for (int j = 0; j < support; ++j) truth[j] = rng.normal();
  Vector y = A * truth;
  for (int i = 0; i < n; ++i) y[i] += noise_sigma * rng.normal();
  return DataSet{std::move(A), std::move(y)};
}

DataSet read_libsvm(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad label '" + tok + "'", line_number);
    }
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError("bad feature '" + tok + "'", line_number);
      }
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        val = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("bad feature '" + tok + "'", line_number);
      }
      if (idx < 1) throw ParseError("indices are 1-based", line_number);
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx - 1, val);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyFileError("no data lines in " + path.string());

  DataSet ds;
  ds.A = Matrix::Zero(static_cast<Index>(rows.size()), max_index);
  ds.b_or_y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.b_or_y[static_cast<Index>(i)] = rows[i].label > 0.0 ? 1.0 : -1.0;
    for (const auto& [j, v] : rows[i].entries) {
      ds.A(static_cast<Index>(i), j) = v;
    }
  }
  if (!all_finite(ds.A)) throw std::runtime_error("non-finite entries in " + path.string());
  return ds;
}

void write_libsvm(const DataSet& ds, const fs::path& path) {
  std::string out;
  for (Index i = 0; i < ds.n(); ++i) {
    out += ds.b_or_y[i] > 0.0 ? "+1" : "-1";
    for (Index j = 0; j < ds.dim(); ++j) {
      if (ds.A(i, j) != 0.0) {
        out += ' ';
        out += std::to_string(j + 1);
        out += ':';
        out += format_double(ds.A(i, j));
      }
    }
    out += '\n';
  }
  atomic_write(path, out);
}

void write_trace(const Trace& trace, const fs::path& csv_path,
                 const json& extra, bool with_vectors) {
  std::string csv = kCsvHeader;
  csv += '\n';
  for (const auto& r : trace.records) {
    csv += std::to_string(r.k);
    csv += ',';
    csv += format_double(r.F_value);
    csv += ',';
    csv += format_double(r.step_norm);
    csv += ',';
    csv += format_double(r.L_k);
    csv += ',';
    csv += std::to_string(r.j_k);
    csv += ',';
    csv += format_double(r.certificate_norm);
    csv += ',';
    csv += format_double(r.prox_residual);
    csv += ',';
    csv += std::to_string(r.inner_iterations);
    csv += '\n';
  }
  atomic_write(csv_path, csv);

  json sidecar;
  sidecar["config"] = config_to_json(trace.config);
  sidecar["termination"] = to_string(trace.termination);
  for (const auto& [key, value] : extra.items()) sidecar[key] = value;
  atomic_write(sidecar_path(csv_path, ".json"), sidecar.dump(2) + "\n");

  const bool have_vectors =
      !trace.records.empty() &&
      std::all_of(trace.records.begin(), trace.records.end(),
                  [](const IterateRecord& r) { return r.x.size() > 0; });
  const fs::path xbin = sidecar_path(csv_path, ".xbin");
  if (with_vectors && have_vectors) {
    std::string blob(kVectorMagic, sizeof(kVectorMagic));
    for (const auto& r : trace.records) {
      append_u32_le(blob, static_cast<std::uint32_t>(r.x.size()));
      for (Index i = 0; i < r.x.size(); ++i) append_f64_le(blob, r.x[i]);
    }
    atomic_write(xbin, blob);
  } else {
    std::error_code ec;
    fs::remove(xbin, ec);  // never leave a stale sidecar next to a fresh CSV
  }
}

void write_trace(const Trace& trace, const fs::path& csv_path) {
  write_trace(trace, csv_path, json::object());
}

Trace read_trace(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open: " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("trace schema mismatch in " + csv_path.string());
  }
  Trace trace;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    IterateRecord r;
    double F, step, L, cert, res;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%d,%lf,%lf,%d", &r.k, &F,
                    &step, &L, &r.j_k, &cert, &res,
                    &r.inner_iterations) != 8) {
      throw ParseError("bad trace row", line_number);
    }
    r.F_value = F;
    r.step_norm = step;
    r.L_k = L;
    r.certificate_norm = cert;
    r.prox_residual = res;
    trace.records.push_back(std::move(r));
  }

  const fs::path side = sidecar_path(csv_path, ".json");
  if (fs::exists(side)) {
    std::ifstream js(side);
    json j = json::parse(js);
    if (j.contains("config")) trace.config = config_from_json(j["config"]);
    if (j.contains("termination")) {
      trace.termination = termination_from_string(j["termination"]);
    }
  }

  const fs::path xbin = sidecar_path(csv_path, ".xbin");
  if (fs::exists(xbin)) {
    std::ifstream xb(xbin, std::ios::binary);
    char magic[5];
    if (!xb.read(magic, 5) || std::memcmp(magic, kVectorMagic, 5) != 0) {
      throw std::runtime_error("bad vector sidecar magic in " + xbin.string());
    }
    for (auto& r : trace.records) {
      unsigned char len_bytes[4];
      if (!xb.read(reinterpret_cast<char*>(len_bytes), 4)) {
        throw std::runtime_error("truncated vector sidecar: " + xbin.string());
      }
      std::uint32_t len = 0;
      for (int i = 3; i >= 0; --i) len = (len << 8) | len_bytes[i];
      r.x.resize(static_cast<Index>(len));
      for (std::uint32_t i = 0; i < len; ++i) {
        unsigned char b[8];
        if (!xb.read(reinterpret_cast<char*>(b), 8)) {
          throw std::runtime_error("truncated vector sidecar: " + xbin.string());
        }
        std::uint64_t bits = 0;
        for (int t = 7; t >= 0; --t) bits = (bits << 8) | b[t];
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        r.x[static_cast<Index>(i)] = v;
      }
    }
  }
  return trace;
}

std::string to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::LogisticL0: return "logistic-l0";
    case ProblemKind::LeastSquaresL0: return "least-squares-l0";
    case ProblemKind::LeastSquaresL1: return "least-squares-l1";
    case ProblemKind::SyntheticKL: return "synthetic-kl";
    case ProblemKind::QuadraticSmooth: return "quadratic";
  }
  return "unknown";
}

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::ProxNewton: return "prox-newton";
    case SolverKind::PGBaseline: return "pg";
    case SolverKind::SynthGenerator: return "synth";
  }
  return "unknown";
}

ProblemKind problem_from_string(const std::string& s) {
  if (s == "logistic-l0") return ProblemKind::LogisticL0;
  if (s == "least-squares-l0") return ProblemKind::LeastSquaresL0;
  if (s == "least-squares-l1") return ProblemKind::LeastSquaresL1;
  if (s == "synthetic-kl") return ProblemKind::SyntheticKL;
  if (s == "quadratic") return ProblemKind::QuadraticSmooth;
  throw std::invalid_argument("unknown problem: " + s);
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "prox-newton") return SolverKind::ProxNewton;
  if (s == "pg") return SolverKind::PGBaseline;
  if (s == "synth") return SolverKind::SynthGenerator;
  throw std::invalid_argument("unknown solver: " + s);
}

namespace {

double param(const ExperimentSpec& spec, const std::string& key,
             double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

std::uint64_t required_seed(const ExperimentSpec& spec) {
  const auto it = spec.params.find("seed");
  if (it == spec.params.end()) {
    throw std::invalid_argument("experiment spec: seed is mandatory");
  }
  return static_cast<std::uint64_t>(it->second);
}

}  // namespace

CompositeObjective build_problem(const ExperimentSpec& spec) {
  const int n = static_cast<int>(param(spec, "n", 200));
  const int dim = static_cast<int>(param(spec, "dim", 50));
  const double lambda = param(spec, "lambda", 0.1);

  switch (spec.problem) {
    case ProblemKind::LogisticL0: {
      const double mu = param(spec, "mu", 1e-5);
      DataSet ds;
      if (!spec.data_path.empty()) {
        ds = read_libsvm(spec.data_path);
      } else {
        const int sparsity = static_cast<int>(
            param(spec, "support", std::max(1, dim / 10)));
        ds = gen_logistic_data(n, dim, required_seed(spec), sparsity);
      }
      return logistic_l0_objective(ds.A, ds.b_or_y, mu, lambda);
    }
    case ProblemKind::LeastSquaresL0:
    case ProblemKind::LeastSquaresL1: {
      DataSet ds;
      if (!spec.data_path.empty()) {
        ds = read_libsvm(spec.data_path);
      } else {
        const int support = static_cast<int>(
            param(spec, "support", std::max(1, dim / 10)));
        const double noise = param(spec, "noise", 0.0);
        ds = gen_least_squares_data(n, dim, required_seed(spec), noise, support);
      }
      return spec.problem == ProblemKind::LeastSquaresL0
                 ? least_squares_l0_objective(ds.A, ds.b_or_y, lambda)
                 : least_squares_l1_objective(ds.A, ds.b_or_y, lambda);
    }
    case ProblemKind::QuadraticSmooth: {
      Xoshiro256 rng(required_seed(spec));
      Matrix B(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) B(i, j) = rng.normal();
      }
      Matrix Q = B.transpose() * B;
      Q.diagonal().array() += 1.0;  // keep it safely positive definite
      Vector c(dim);
      for (int i = 0; i < dim; ++i) c[i] = rng.normal();
      return quadratic_objective(Q, c);
    }
    case ProblemKind::SyntheticKL:
      throw std::invalid_argument(
          "synthetic-kl has no composite objective; use the synth generator");
  }
  throw std::invalid_argument("unhandled problem kind");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;

  if (spec.solver == SolverKind::SynthGenerator ||
      spec.problem == ProblemKind::SyntheticKL) {
    if (spec.solver != SolverKind::SynthGenerator ||
        spec.problem != ProblemKind::SyntheticKL) {
      throw std::invalid_argument(
          "synthetic-kl problems pair only with the synth generator");
    }
    SyntheticKLProblem prob;
    prob.gamma = param(spec, "gamma", 2.0);
    prob.p = param(spec, "p", 2.0);
    const int n_steps = static_cast<int>(param(spec, "n_steps", 40));
    const double a = param(spec, "a", 1.0);
    const double b = param(spec, "b", 1.0);
    const int dim = static_cast<int>(param(spec, "dim", 2));
    const double x0_norm = param(spec, "x0", 0.5);
    Vector x0 = Vector::Constant(dim, x0_norm / std::sqrt(double(dim)));
    result.trace = synth_kl_run(prob, a, b, x0, n_steps);
    result.p = prob.p;
  } else {
    const CompositeObjective obj = build_problem(spec);
    Vector x0 = Vector::Constant(obj.smooth.dim, param(spec, "x0", 0.0));
    if (spec.solver == SolverKind::ProxNewton) {
      result.trace = run(obj, x0, spec.config);
      result.p = spec.config.q - 1.0;
    } else {
      result.trace = pg_baseline_run(obj, x0, spec.pg);
      result.p = 1.0;
    }
  }

  result.framework = fit_constants(result.trace, result.p);
  try {
    const auto errors = iterate_errors(result.trace);
    double scale = result.trace.records.back().x.norm();
    for (double e : errors) scale = std::max(scale, e);
    result.rate = estimate_q_order(errors, scale);
    result.rate_available = true;
  } catch (const TooShortError&) {
    result.rate_available = false;
  }

  if (!spec.output_path.empty()) {
    const fs::path dir(spec.output_path);
    fs::create_directories(dir);
    json extra;
    extra["problem"] = to_string(spec.problem);
    extra["seed"] = spec.params.count("seed") ? spec.params.at("seed") : 0.0;
    extra["fitted_a"] = result.framework.a_fit;
    extra["fitted_b"] = result.framework.b_fit;
    extra["q_order_tail"] =
        result.rate_available ? result.rate.q_order_tail : 0.0;
    extra["regime"] = result.rate_available ? to_string(result.rate.regime)
                                            : "Inconclusive";
    write_trace(result.trace, dir / "trace.csv", extra);
  }
  return result;
}

}  // namespace klprox
