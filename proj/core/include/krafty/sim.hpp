#pragma once

#include "krafty/joint.hpp"
#include "krafty/rng.hpp"
#include "krafty/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace krafty {

enum class InputKind { Z, U, X };

/// One cell of the experiment grid: Gaussian-mixture views with a planted
/// joint structure, run through one method with one input preparation.
struct SimConfig {
  int n = 1000;
  int p = 20;             // observation dimension
  double sigma2 = 0.1;    // within-cluster variance
  int k1 = 4;
  int k2 = 4;
  int k = 9;              // joint clusters, max(k1,k2) <= k <= k1*k2
  int reps = 100;
  std::uint64_t seed = 0;
  InputKind input_kind = InputKind::U;
  Method method = Method::krafty;
  bool k_known = false;
  int which_elbow = 2;

  void validate() const;
  std::uint64_t hash() const;
};

/// Joint labels over n items plus the projections onto the two views.
struct PlantedStructure {
  Assignment joint;
  ProjectionMatrix proj1;
  ProjectionMatrix proj2;
  /// (k1, k2) grid cell of each joint cluster; distinct across clusters.
  std::vector<std::pair<int, int>> cell_of_cluster;
};

/// Samples K distinct cells of the k1 x k2 grid covering every grid row and
/// column, pins one item per cell, and spreads the remaining n - K items
/// multinomially with uniform weights over the cells.
PlantedStructure sample_planted_structure(const SimConfig& cfg, Rng& rng);

/// Gaussian views: per-view cluster centers drawn i.i.d. standard normal in
/// dimension p (redrawn on exact duplication), observations
/// center + sigma * standard normal.
std::pair<Matrix, Matrix> generate_views(const PlantedStructure& s,
                                         const SimConfig& cfg, Rng& rng);

/// Turns the raw views into method inputs. U: top-K_v left singular
/// vectors. Z: k-means on that embedding with k = K_v. X: the singular
/// vectors scaled by the square roots of the singular values.
std::vector<ViewInput> prepare_inputs(const Matrix& y1, const Matrix& y2,
                                      const SimConfig& cfg, std::uint64_t seed);

struct RunRecord {
  std::uint64_t config_hash = 0;
  int rep = 0;
  double ari = 0.0;
  int k_hat = 0;
  int abs_err_k = 0;
  double wall_ms = 0.0;
  bool failed = false;
  std::string error;
};

struct ConfigSummary {
  SimConfig config;
  int reps_ok = 0;
  int failures = 0;
  double mean_ari = 0.0;
  double ci_low = 0.0;   // mean - 1.96 SE
  double ci_high = 0.0;  // mean + 1.96 SE
  double mean_abs_err_k = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;      // grid order, then rep order
  std::vector<ConfigSummary> summaries;
};

/// Runs every (config, rep) cell. Rep seeds are counter-based splits of
/// (master_seed, config hash, rep), so the result is a pure function of the
/// grid and master seed regardless of the thread count. Individual rep
/// failures are recorded, not fatal.
ExperimentResult run_experiment(const std::vector<SimConfig>& grid,
                                std::uint64_t master_seed, int threads = 1);

/// Named experiment grids: fig2, fig3, fig4, fig5, appendix-k1k2.
std::vector<SimConfig> preset_grid(const std::string& name, int reps,
                                   std::uint64_t seed);
std::vector<std::string> preset_names();

/// Key-value grid file; multi-valued keys (comma lists) expand as a
/// cross-product.
std::vector<SimConfig> parse_config_text(const std::string& text);
std::vector<SimConfig> load_config_file(const std::filesystem::path& path);

std::string results_csv_text(const ExperimentResult& r);
std::string summary_csv_text(const ExperimentResult& r);
void write_results_csv(const std::filesystem::path& path, const ExperimentResult& r);
void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& r);

std::string to_string(InputKind kind);
std::string to_string(Method method);

}  // namespace krafty
