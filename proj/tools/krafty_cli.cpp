// Command-line front end: joint clustering runs, simulation grids,
// cluster-count selection, and the trade-network pipeline. Every command
// writes its outputs plus a manifest into --out and nowhere else.

#include "krafty/ingest.hpp"
#include "krafty/io.hpp"
#include "krafty/joint.hpp"
#include "krafty/linalg.hpp"
#include "krafty/selectk.hpp"
#include "krafty/sim.hpp"
#include "krafty/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace krafty;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

// Buffers every output and writes only on success, so a failing command
// leaves no partial files behind. The manifest records digests for the
// deterministic outputs; files carrying wall-clock timings are listed as
// volatile instead.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content, bool is_volatile = false) {
    files_.emplace_back(name, std::move(content));
    if (is_volatile) volatile_.push_back(name);
  }

  void finalize(const std::string& command, const std::vector<std::string>& argv,
                std::uint64_t seed, const std::map<std::string, std::string>& input_digests) {
    fs::create_directories(dir_);
    json manifest;
    manifest["command"] = command;
    manifest["argv"] = argv;
    manifest["master_seed"] = seed;
    manifest["tool_version"] = kVersion;
    manifest["inputs"] = input_digests;
    json outputs = json::object();
    json volatile_outputs = json::array();
    for (const auto& [name, content] : files_) {
      io::write_file(dir_ / name, content);
      if (std::find(volatile_.begin(), volatile_.end(), name) == volatile_.end()) {
        outputs[name] = io::file_digest(dir_ / name);
      } else {
        volatile_outputs.push_back(name);
      }
    }
    manifest["outputs"] = outputs;
    manifest["volatile_outputs"] = volatile_outputs;
    io::write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::string> volatile_;
};

std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream out;
  out << "index,value,gap\n";
  const auto& values = s.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double gap = i + 1 < values.size() ? values[i] - values[i + 1] : 0.0;
    out << (i + 1) << ',' << io::format_double(values[i]) << ',' << io::format_double(gap) << '\n';
  }
  return out.str();
}

std::string assignment_csv(const Assignment& a) {
  std::ostringstream out;
  for (int i = 0; i < a.n(); ++i) out << a[i] << '\n';
  return out.str();
}

std::string dendrogram_csv(const Dendrogram& d) {
  std::ostringstream out;
  out << "step,left,right,merged,height\n";
  for (const auto& m : d.merges) {
    out << m.step << ',' << m.left << ',' << m.right << ',' << m.merged << ','
        << io::format_double(m.height) << '\n';
  }
  return out.str();
}

Method parse_method(const std::string& name) {
  if (name == "krafty") return Method::krafty;
  if (name == "mase") return Method::mase;
  throw input_error("unknown method '" + name + "' (expected krafty or mase)");
}

// --- cluster ---------------------------------------------------------------

struct ClusterArgs {
  std::vector<std::string> views;
  int k = -1;
  std::string method = "krafty";
  std::string clusterer = "hc";
  int which_elbow = 2;
  std::uint64_t seed = 0;
  bool regularize = false;
  double reg_scale = 2.0;
  std::string out;
};

int run_cluster(const ClusterArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  if (args.views.size() < 2) throw input_error("cluster: need at least two --view inputs");

  std::map<std::string, std::string> digests;
  std::vector<ViewInput> views;
  json view_meta = json::array();
  for (const auto& spec : args.views) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw input_error("cluster: view spec '" + spec + "' must be kind:path with kind z or u");
    }
    const std::string kind = spec.substr(0, colon);
    const fs::path path = spec.substr(colon + 1);
    digests[path.string()] = io::file_digest(path);
    if (kind == "z") {
      views.push_back(ViewInput::from_assignment(io::read_assignment_csv(path)));
    } else if (kind == "u") {
      views.push_back(ViewInput::from_embedding(Embedding::from_matrix(io::read_matrix_csv(path)), 1e-6));
    } else {
      throw input_error("cluster: view kind '" + kind + "' must be z or u");
    }
    view_meta.push_back({{"kind", kind},
                         {"path", path.string()},
                         {"cols", static_cast<std::int64_t>(views.back().cols())}});
  }

  JointOptions opts;
  if (args.k >= 0) opts.k = args.k;
  opts.which_elbow = args.which_elbow;
  opts.seed = args.seed;
  opts.regularize_first_view = args.regularize;
  opts.regularize_scale = args.reg_scale;
  if (args.clusterer == "hc") {
    opts.clusterer = FinalClusterer::hc;
  } else if (args.clusterer == "kmeans") {
    opts.clusterer = FinalClusterer::kmeans;
  } else {
    throw input_error("cluster: clusterer '" + args.clusterer + "' must be hc or kmeans");
  }
  const Method method = parse_method(args.method);

  const JointResult result = method == Method::krafty ? krafty::krafty(views, opts) : mase(views, opts);
  if (result.k_capped) {
    std::cerr << "warning: requested k exceeds the available rank, proceeding with k = "
              << result.k_used << "\n";
  }

  OutputSet outputs{fs::path(args.out)};
  outputs.add("labels.csv", assignment_csv(result.labels));
  outputs.add("spectrum.csv", spectrum_csv(result.spectrum));
  if (result.dendrogram.has_value()) {
    outputs.add("dendrogram.csv", dendrogram_csv(*result.dendrogram));
  }
  json summary;
  summary["method"] = to_string(result.method);
  summary["k_used"] = result.k_used;
  summary["k_source"] = result.k_source == KSource::given ? "given" : "estimated";
  summary["k_capped"] = result.k_capped;
  summary["n"] = result.labels.n();
  summary["clusterer"] = args.clusterer;
  summary["which_elbow"] = args.which_elbow;
  summary["seed"] = args.seed;
  summary["views"] = view_meta;
  summary["timing_ms"] = {{"total", watch.ms()}};
  outputs.add("summary.json", summary.dump(2) + "\n", /*is_volatile=*/true);
  outputs.finalize("cluster", argv, args.seed, digests);
  return kExitOk;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string preset;
  std::string config;
  int reps = 0;  // 0 keeps the preset/config value
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv) {
  if (args.preset.empty() == args.config.empty()) {
    throw input_error("simulate: pass exactly one of --preset or --config");
  }
  std::map<std::string, std::string> digests;
  std::vector<SimConfig> grid;
  if (!args.preset.empty()) {
    grid = preset_grid(args.preset, args.reps > 0 ? args.reps : 100, args.seed);
  } else {
    digests[args.config] = io::file_digest(args.config);
    grid = load_config_file(args.config);
    if (args.reps > 0) {
      for (auto& cfg : grid) cfg.reps = args.reps;
    }
  }

  const ExperimentResult result = run_experiment(grid, args.seed, args.threads);
  int failures = 0;
  for (const auto& record : result.records) {
    if (record.failed) ++failures;
  }
  if (failures > 0) {
    std::cerr << "warning: " << failures << " of " << result.records.size()
              << " repetitions failed; see results.csv\n";
  }

  OutputSet outputs{fs::path(args.out)};
  outputs.add("results.csv", results_csv_text(result), /*is_volatile=*/true);  // wall_ms column
  outputs.add("summary.csv", summary_csv_text(result));
  outputs.finalize("simulate", argv, args.seed, digests);
  return kExitOk;
}

// --- select-k ---------------------------------------------------------------

struct SelectKArgs {
  std::string spectrum;
  std::string dendrogram;
  std::string strategy = "profile";
  int which = 2;
  std::string out;
};

int run_select_k(const SelectKArgs& args, const std::vector<std::string>& argv) {
  if (args.spectrum.empty() == args.dendrogram.empty()) {
    throw input_error("select-k: pass exactly one of --spectrum or --dendrogram");
  }
  std::map<std::string, std::string> digests;
  int k_hat = 0;
  std::ostringstream profile;
  if (args.strategy == "gap" || args.strategy == "profile") {
    if (args.spectrum.empty()) {
      throw input_error("select-k: strategy '" + args.strategy + "' needs --spectrum");
    }
    digests[args.spectrum] = io::file_digest(args.spectrum);
    const Spectrum s = io::read_spectrum_csv(args.spectrum);
    if (args.strategy == "gap") {
      k_hat = largest_gap(s);
      profile << "position,gap\n";
      const auto gaps = s.gaps();
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        profile << (i + 1) << ',' << io::format_double(gaps[i]) << '\n';
      }
    } else {
      const ElbowEstimate e = profile_likelihood_elbow(s, args.which);
      k_hat = e.k_hat;
      profile << "split,score\n";
      for (std::size_t i = 0; i < e.profile.size(); ++i) {
        profile << (i + 1) << ',' << io::format_double(e.profile[i]) << '\n';
      }
    }
  } else if (args.strategy == "merge-height") {
    if (args.dendrogram.empty()) throw input_error("select-k: strategy 'merge-height' needs --dendrogram");
    digests[args.dendrogram] = io::file_digest(args.dendrogram);
    const Dendrogram d = io::read_dendrogram_csv(args.dendrogram);
    const MergeHeightEstimate e = merge_height_elbow(d);
    k_hat = e.k_hat;
    if (e.low_confidence) std::cerr << "warning: no discernible jump in merge heights\n";
    profile << "step,height_gap\n";
    for (std::size_t i = 0; i + 1 < d.merges.size(); ++i) {
      profile << d.merges[i].step << ','
              << io::format_double(d.merges[i + 1].height - d.merges[i].height) << '\n';
    }
  } else {
    throw input_error("select-k: strategy '" + args.strategy + "' must be gap, profile, or merge-height");
  }

  OutputSet outputs{fs::path(args.out)};
  outputs.add("profile.csv", profile.str());
  json summary;
  summary["k_hat"] = k_hat;
  summary["strategy"] = args.strategy;
  if (args.strategy == "profile") summary["which"] = args.which;
  outputs.add("selection.json", summary.dump(2) + "\n");
  outputs.finalize("select-k", argv, 0, digests);
  std::cout << k_hat << "\n";
  return kExitOk;
}

// --- trade ------------------------------------------------------------------

struct TradeArgs {
  std::vector<std::string> views;
  std::string universe;
  int k = -1;
  std::string method = "krafty";
  int which_elbow = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int run_trade(const TradeArgs& args, const std::vector<std::string>& argv) {
  Stopwatch watch;
  if (args.views.size() < 2) throw input_error("trade: need at least two --view inputs");

  std::map<std::string, std::string> digests;
  std::optional<std::vector<std::string>> universe;
  if (!args.universe.empty()) {
    digests[args.universe] = io::file_digest(args.universe);
    universe = load_vertex_universe(args.universe);
  }

  std::vector<TradeView> views;
  json view_meta = json::array();
  for (const auto& spec : args.views) {
    // path:role:d:k
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = spec.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(spec.substr(start));
        break;
      }
      parts.push_back(spec.substr(start, pos - start));
      start = pos + 1;
    }
    if (parts.size() != 4) {
      throw input_error("trade: view spec '" + spec + "' must be path:role:d:k");
    }
    TradeView view;
    digests[parts[0]] = io::file_digest(parts[0]);
    view.net = load_edge_list(parts[0], universe);
    if (parts[1] == "exporter") view.role = TradeRole::exporter;
    else if (parts[1] == "importer") view.role = TradeRole::importer;
    else throw input_error("trade: role '" + parts[1] + "' must be exporter or importer");
    try {
      view.d = std::stoi(parts[2]);
      view.k = std::stoi(parts[3]);
    } catch (...) {
      throw input_error("trade: bad d or k in view spec '" + spec + "'");
    }
    view_meta.push_back({{"path", parts[0]}, {"role", parts[1]}, {"d", view.d}, {"k", view.k}});
    views.push_back(std::move(view));
  }

  JointOptions base;
  base.which_elbow = args.which_elbow;
  const TradeResult result = trade_pipeline(views, args.k >= 0 ? std::optional<int>(args.k) : std::nullopt,
                                            parse_method(args.method), args.seed, base);

  OutputSet outputs{fs::path(args.out)};
  {
    std::ostringstream membership;
    membership << "vertex_name,cluster\n";
    std::map<std::string, int> cluster_of;
    for (std::size_t i = 0; i < result.vertex_names.size(); ++i) {
      cluster_of[result.vertex_names[i]] = result.joint.labels[static_cast<int>(i)];
    }
    for (const auto& name : result.excluded) cluster_of[name] = -1;
    for (const auto& [name, cluster] : cluster_of) membership << name << ',' << cluster << '\n';
    outputs.add("membership.csv", membership.str());
  }
  outputs.add("spectrum.csv", spectrum_csv(result.joint.spectrum));
  for (std::size_t v = 0; v < result.view_assignments.size(); ++v) {
    outputs.add("view_" + std::to_string(v) + "_assignment.csv",
                assignment_csv(result.view_assignments[v]));
  }
  json summary;
  summary["method"] = args.method;
  summary["k_used"] = result.joint.k_used;
  summary["k_source"] = result.joint.k_source == KSource::given ? "given" : "estimated";
  summary["clustered_vertices"] = result.vertex_names.size();
  summary["excluded_vertices"] = result.excluded;
  summary["views"] = view_meta;
  summary["seed"] = args.seed;
  summary["timing_ms"] = {{"total", watch.ms()}};
  outputs.add("summary.json", summary.dump(2) + "\n", /*is_volatile=*/true);
  outputs.finalize("trade", argv, args.seed, digests);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> raw_args(argv, argv + argc);

  CLI::App app{"Multi-view joint clustering via the transposed Khatri-Rao product"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ClusterArgs cluster_args;
  auto* cluster_cmd = app.add_subcommand("cluster", "Joint clustering of view files");
  cluster_cmd->add_option("--view", cluster_args.views,
                          "View input as kind:path (kind z = assignment CSV, u = embedding CSV); repeat >= 2 times")
      ->required();
  cluster_cmd->add_option("--k", cluster_args.k, "Joint cluster count (estimated when omitted)");
  cluster_cmd->add_option("--method", cluster_args.method, "krafty or mase")->capture_default_str();
  cluster_cmd->add_option("--clusterer", cluster_args.clusterer, "Final clusterer: hc or kmeans")
      ->capture_default_str();
  cluster_cmd->add_option("--which-elbow", cluster_args.which_elbow, "Elbow order when estimating k")
      ->capture_default_str();
  cluster_cmd->add_option("--seed", cluster_args.seed, "RNG seed")->capture_default_str();
  cluster_cmd->add_flag("--regularize", cluster_args.regularize,
                        "Row-norm regularize the first embedding view");
  cluster_cmd->add_option("--reg-scale", cluster_args.reg_scale,
                          "Scale C in delta = C sqrt(K_v/n)")->capture_default_str();
  cluster_cmd->add_option("--out", cluster_args.out, "Output directory")->required();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation grid");
  sim_cmd->add_option("--preset", sim_args.preset, "fig2, fig3, fig4, fig5, or appendix-k1k2");
  sim_cmd->add_option("--config", sim_args.config, "Key-value grid file");
  sim_cmd->add_option("--reps", sim_args.reps, "Repetitions per grid cell (overrides preset/config)");
  sim_cmd->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim_args.threads, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--out", sim_args.out, "Output directory")->required();

  SelectKArgs select_args;
  auto* select_cmd = app.add_subcommand("select-k", "Estimate the joint cluster count");
  select_cmd->add_option("--spectrum", select_args.spectrum, "Spectrum CSV (index,value,gap or bare values)");
  select_cmd->add_option("--dendrogram", select_args.dendrogram, "Dendrogram CSV from a cluster run");
  select_cmd->add_option("--strategy", select_args.strategy, "gap, profile, or merge-height")
      ->capture_default_str();
  select_cmd->add_option("--which", select_args.which, "Elbow order for the profile strategy")
      ->capture_default_str();
  select_cmd->add_option("--out", select_args.out, "Output directory")->required();

  TradeArgs trade_args;
  auto* trade_cmd = app.add_subcommand("trade", "Joint clustering of weighted directed networks");
  trade_cmd->add_option("--view", trade_args.views,
                        "View as path:role:d:k (role exporter or importer); repeat >= 2 times")
      ->required();
  trade_cmd->add_option("--universe", trade_args.universe, "Vertex universe file, one name per line");
  trade_cmd->add_option("--k", trade_args.k, "Joint cluster count (estimated when omitted)");
  trade_cmd->add_option("--method", trade_args.method, "krafty or mase")->capture_default_str();
  trade_cmd->add_option("--which-elbow", trade_args.which_elbow, "Elbow order when estimating k")
      ->capture_default_str();
  trade_cmd->add_option("--seed", trade_args.seed, "RNG seed")->capture_default_str();
  trade_cmd->add_option("--out", trade_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitInput;
  }

  try {
    if (cluster_cmd->parsed()) return run_cluster(cluster_args, raw_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args, raw_args);
    if (select_cmd->parsed()) return run_select_k(select_args, raw_args);
    if (trade_cmd->parsed()) return run_trade(trade_args, raw_args);
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
