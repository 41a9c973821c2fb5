#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "klprox/analysis.hpp"

namespace klprox {

struct DataSet {
  Matrix A;       // n x dim, dense
  Vector b_or_y;  // labels or targets, length n

  Index n() const { return A.rows(); }
  Index dim() const { return A.cols(); }
};

/// Rows sampled standard normal from a seeded xoshiro256++ stream (row by
/// row, then the ground truth, then the label noise). The ground truth has
/// `sparsity_of_truth` leading nonzero coordinates; labels are
/// sign(<a_i, x*> + 0.1*noise) with ties broken to +1.
DataSet gen_logistic_data(int n, int dim, std::uint64_t seed,
                          int sparsity_of_truth);

/// y = A x* + noise_sigma * gaussian, with x* supported on the leading
/// `support` coordinates.
DataSet gen_least_squares_data(int n, int dim, std::uint64_t seed,
                               double noise_sigma, int support);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line_number)
      : std::runtime_error(what), line(line_number) {}
  int line;
};

class EmptyFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the sparse libsvm line format "label idx:val idx:val ..." with
/// 1-based indices into a dense DataSet. Labels 0 and negatives map to -1,
/// positives to +1.
DataSet read_libsvm(const std::filesystem::path& path);

/// Writes a DataSet in libsvm format (nonzero entries only, 17 significant
/// digits).
void write_libsvm(const DataSet& ds, const std::filesystem::path& path);

/// Writes the trace scalars as CSV (header
/// k,F,step_norm,L_k,j_k,cert_norm,prox_residual,inner_iters; floats with 17
/// significant digits), a JSON sidecar with the config and termination plus
/// `extra` keys, and, when the records carry iterate vectors, a binary
/// sidecar (magic "KLPX1", length-prefixed little-endian doubles). All files
/// are written to a temp name and renamed into place.
void write_trace(const Trace& trace, const std::filesystem::path& csv_path,
                 const nlohmann::json& extra, bool with_vectors = true);
void write_trace(const Trace& trace, const std::filesystem::path& csv_path);

/// Reads back CSV + sidecars. Scalar fields round-trip bit-exactly; iterate
/// vectors are restored when the binary sidecar is present.
Trace read_trace(const std::filesystem::path& csv_path);

enum class ProblemKind {
  LogisticL0,
  LeastSquaresL0,
  LeastSquaresL1,
  SyntheticKL,
  QuadraticSmooth
};

enum class SolverKind { ProxNewton, PGBaseline, SynthGenerator };

std::string to_string(ProblemKind p);
std::string to_string(SolverKind s);
ProblemKind problem_from_string(const std::string& s);
SolverKind solver_from_string(const std::string& s);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::QuadraticSmooth;
  /// Numeric knobs: n, dim, mu, lambda, noise, support, gamma, p, a, b,
  /// n_steps, x0 (constant fill for the start point). `seed` is mandatory.
  std::map<std::string, double> params;
  SolverKind solver = SolverKind::ProxNewton;
  SolverConfig config;
  PgConfig pg;
  std::string output_path;  // directory; empty disables persistence
  std::string data_path;    // libsvm input for data-driven problems
};

struct ExperimentResult {
  Trace trace;
  FrameworkReport framework;
  RateReport rate;
  bool rate_available = false;
  double p = 1.0;  // framework exponent used for verification
};

/// Builds the problem, runs the requested solver, verifies H1-H2 with the
/// solver's framework exponent, estimates rates, and persists trace.csv,
/// trace.json and trace.xbin under output_path.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Builds the composite objective an ExperimentSpec describes (shared by
/// run_experiment and the CLI).
CompositeObjective build_problem(const ExperimentSpec& spec);

}  // namespace klprox
