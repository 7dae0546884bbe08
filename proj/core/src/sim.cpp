#include "krafty/sim.hpp"

#include "krafty/io.hpp"
#include "krafty/linalg.hpp"
#include "krafty/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace krafty {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

// Distinct grid cells covering every row and every column: a shuffled
// transversal of length max(k1, k2) first, then uniform draws from the
// remaining cells. Rejection sampling over all K-subsets is hopeless for
// K = max(k1, k2) on larger grids, so coverage is built in.
std::vector<std::pair<int, int>> sample_cells(int k1, int k2, int k, Rng& rng) {
  auto shuffled = [&](int count) {
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    return order;
  };
  const auto rows = shuffled(k1);
  const auto cols = shuffled(k2);
  const int base = std::max(k1, k2);
  std::vector<char> taken(static_cast<std::size_t>(k1) * static_cast<std::size_t>(k2), 0);
  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < base; ++i) {
    const int r = rows[static_cast<std::size_t>(i % k1)];
    const int c = cols[static_cast<std::size_t>(i % k2)];
    taken[static_cast<std::size_t>(r) * static_cast<std::size_t>(k2) + static_cast<std::size_t>(c)] = 1;
    cells.emplace_back(r, c);
  }
  std::vector<int> free_cells;
  for (int idx = 0; idx < k1 * k2; ++idx) {
    if (!taken[static_cast<std::size_t>(idx)]) free_cells.push_back(idx);
  }
  for (int extra = base; extra < k; ++extra) {
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1));
    const int idx = free_cells[pick];
    free_cells.erase(free_cells.begin() + static_cast<std::ptrdiff_t>(pick));
    cells.emplace_back(idx / k2, idx % k2);
  }
  return cells;
}

Matrix draw_centers(int k, int p, Rng& rng) {
  Matrix centers(k, p);
  while (true) {
    for (Index i = 0; i < centers.rows(); ++i) {
      for (Index j = 0; j < centers.cols(); ++j) centers(i, j) = rng.normal();
    }
    bool duplicate = false;
    for (Index a = 0; a < centers.rows() && !duplicate; ++a) {
      for (Index b = a + 1; b < centers.rows() && !duplicate; ++b) {
        duplicate = centers.row(a) == centers.row(b);
      }
    }
    if (!duplicate) return centers;
  }
}

RunRecord run_one(const SimConfig& cfg, int rep, std::uint64_t rep_seed) {
  RunRecord record;
  record.config_hash = cfg.hash();
  record.rep = rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    Rng rng(rep_seed);
    const PlantedStructure planted = sample_planted_structure(cfg, rng);
    const auto [y1, y2] = generate_views(planted, cfg, rng);
    const auto views = prepare_inputs(y1, y2, cfg, Rng::derive(rep_seed, 0x5EEDULL));

    JointOptions run_opts;
    run_opts.clusterer = FinalClusterer::hc;
    run_opts.which_elbow = cfg.which_elbow;
    run_opts.seed = Rng::derive(rep_seed, 0xC1A5ULL);
    if (cfg.k_known) run_opts.k = cfg.k;

    const JointResult result = cfg.method == Method::krafty ? krafty(views, run_opts)
                                                            : mase(views, run_opts);
    record.ari = adjusted_rand_index(planted.joint, result.labels);
    record.k_hat = result.k_used;
    record.abs_err_k = static_cast<int>(abs_error_k(result.k_used, cfg.k));
  } catch (const std::exception& e) {
    record.failed = true;
    record.error = e.what();
  }
  record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::string csv_config_fields(const SimConfig& cfg) {
  std::ostringstream out;
  out << cfg.n << ',' << cfg.p << ',' << io::format_double(cfg.sigma2) << ',' << cfg.k1 << ','
      << cfg.k2 << ',' << cfg.k << ',' << cfg.reps << ',' << cfg.seed << ','
      << to_string(cfg.input_kind) << ',' << to_string(cfg.method) << ','
      << (cfg.k_known ? "true" : "false") << ',' << cfg.which_elbow;
  return out.str();
}

constexpr const char* kConfigHeader =
    "n,p,sigma2,k1,k2,k,reps,seed,input_kind,method,k_known,which_elbow";

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw input_error("sim: n must be positive");
  if (p < 1) throw input_error("sim: p must be positive");
  if (!(sigma2 >= 0.0)) throw input_error("sim: sigma2 must be >= 0");
  if (k1 < 1 || k2 < 1) throw input_error("sim: view cluster counts must be positive");
  if (k < std::max(k1, k2) || k > k1 * k2) {
    throw input_error("sim: k = " + std::to_string(k) + " outside [max(k1,k2), k1*k2] = [" +
                      std::to_string(std::max(k1, k2)) + ", " + std::to_string(k1 * k2) + "]");
  }
  if (n < k) throw input_error("sim: n must be at least k");
  if (reps < 1) throw input_error("sim: reps must be >= 1");
  if (which_elbow < 1) throw input_error("sim: which_elbow must be >= 1");
}

std::uint64_t SimConfig::hash() const {
  std::uint64_t h = 0x12345678ULL;
  h = mix(h, static_cast<std::uint64_t>(n));
  h = mix(h, static_cast<std::uint64_t>(p));
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(sigma2));
  std::memcpy(&bits, &sigma2, sizeof(bits));
  h = mix(h, bits);
  h = mix(h, static_cast<std::uint64_t>(k1));
  h = mix(h, static_cast<std::uint64_t>(k2));
  h = mix(h, static_cast<std::uint64_t>(k));
  h = mix(h, seed);
  h = mix(h, static_cast<std::uint64_t>(input_kind));
  h = mix(h, static_cast<std::uint64_t>(method));
  h = mix(h, k_known ? 1 : 0);
  h = mix(h, static_cast<std::uint64_t>(which_elbow));
  return h;
}

PlantedStructure sample_planted_structure(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto cells = sample_cells(cfg.k1, cfg.k2, cfg.k, rng);

  // One pinned item per joint cluster, the rest multinomial with uniform
  // weights over the selected cells.
  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.k; ++i) labels[static_cast<std::size_t>(i)] = i;
  for (int i = cfg.k; i < cfg.n; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, cfg.k - 1));
  }

  std::vector<int> map1(static_cast<std::size_t>(cfg.k));
  std::vector<int> map2(static_cast<std::size_t>(cfg.k));
  for (int c = 0; c < cfg.k; ++c) {
    map1[static_cast<std::size_t>(c)] = cells[static_cast<std::size_t>(c)].first;
    map2[static_cast<std::size_t>(c)] = cells[static_cast<std::size_t>(c)].second;
  }
  return PlantedStructure{Assignment(std::move(labels), cfg.k),
                          ProjectionMatrix(cfg.k, cfg.k1, std::move(map1)),
                          ProjectionMatrix(cfg.k, cfg.k2, std::move(map2)), cells};
}

std::pair<Matrix, Matrix> generate_views(const PlantedStructure& s, const SimConfig& cfg, Rng& rng) {
  const Matrix centers1 = draw_centers(cfg.k1, cfg.p, rng);
  const Matrix centers2 = draw_centers(cfg.k2, cfg.p, rng);
  const Assignment z1 = project_assignment(s.joint, s.proj1);
  const Assignment z2 = project_assignment(s.joint, s.proj2);
  const double sigma = std::sqrt(cfg.sigma2);
  const int n = s.joint.n();

  Matrix y1(n, cfg.p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.p; ++j) y1(i, j) = centers1(z1[i], j) + sigma * rng.normal();
  }
  Matrix y2(n, cfg.p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cfg.p; ++j) y2(i, j) = centers2(z2[i], j) + sigma * rng.normal();
  }
  return {std::move(y1), std::move(y2)};
}

std::vector<ViewInput> prepare_inputs(const Matrix& y1, const Matrix& y2, const SimConfig& cfg,
                                      std::uint64_t seed) {
  auto prepare_one = [&](const Matrix& y, int kv, std::uint64_t view_seed) {
    // Low-dimensional observations (p < K_v) carry at most p singular
    // directions; k-means still separates K_v clusters on the smaller
    // embedding.
    const SvdResult svd = svd_k(y, std::min<Index>(kv, y.cols()));
    switch (cfg.input_kind) {
      case InputKind::U:
        return ViewInput::from_embedding(svd.left);
      case InputKind::Z: {
        const KMeansResult km = kmeans(svd.left.matrix, kv, 10, 100, view_seed);
        return ViewInput::from_assignment(km.assignment);
      }
      case InputKind::X: {
        Matrix scaled = svd.left.matrix;
        for (Index j = 0; j < scaled.cols(); ++j) {
          scaled.col(j) *= std::sqrt(std::max(svd.values[static_cast<std::size_t>(j)], 0.0));
        }
        // Scaled singular vectors are deliberately not orthonormal.
        return ViewInput::from_embedding(Embedding::from_matrix(std::move(scaled)),
                                         std::numeric_limits<double>::infinity());
      }
    }
    throw input_error("sim: unknown input kind");
  };
  std::vector<ViewInput> views;
  views.push_back(prepare_one(y1, cfg.k1, Rng::derive(seed, 1)));
  views.push_back(prepare_one(y2, cfg.k2, Rng::derive(seed, 2)));
  return views;
}

ExperimentResult run_experiment(const std::vector<SimConfig>& grid, std::uint64_t master_seed,
                                int threads) {
  for (const auto& cfg : grid) cfg.validate();
  if (threads < 1) threads = 1;

  struct Task {
    std::size_t config_index;
    int rep;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::vector<std::size_t> offsets(grid.size() + 1, 0);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const std::uint64_t config_seed = Rng::derive(master_seed, grid[c].hash());
    offsets[c + 1] = offsets[c] + static_cast<std::size_t>(grid[c].reps);
    for (int rep = 0; rep < grid[c].reps; ++rep) {
      tasks.push_back({c, rep, Rng::derive(config_seed, static_cast<std::uint64_t>(rep))});
    }
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      records[t] = run_one(grid[tasks[t].config_index], tasks[t].rep, tasks[t].seed);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult out;
  out.records = std::move(records);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    ConfigSummary summary;
    summary.config = grid[c];
    double sum_ari = 0.0;
    double sum_abs = 0.0;
    std::vector<double> aris;
    for (std::size_t t = offsets[c]; t < offsets[c + 1]; ++t) {
      const auto& record = out.records[t];
      if (record.failed) {
        ++summary.failures;
        continue;
      }
      ++summary.reps_ok;
      sum_ari += record.ari;
      sum_abs += record.abs_err_k;
      aris.push_back(record.ari);
    }
    if (summary.reps_ok > 0) {
      summary.mean_ari = sum_ari / summary.reps_ok;
      summary.mean_abs_err_k = sum_abs / summary.reps_ok;
      double ss = 0.0;
      for (const double a : aris) ss += (a - summary.mean_ari) * (a - summary.mean_ari);
      const double se = summary.reps_ok > 1
                            ? std::sqrt(ss / (summary.reps_ok - 1)) / std::sqrt(static_cast<double>(summary.reps_ok))
                            : 0.0;
      summary.ci_low = summary.mean_ari - 1.96 * se;
      summary.ci_high = summary.mean_ari + 1.96 * se;
    }
    out.summaries.push_back(std::move(summary));
  }
  return out;
}

std::vector<SimConfig> preset_grid(const std::string& name, int reps, std::uint64_t seed) {
  std::vector<SimConfig> grid;
  auto push = [&](int n, int p, double sigma2, int k1, int k2, int k, InputKind kind,
                  Method method, bool k_known) {
    SimConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.sigma2 = sigma2;
    cfg.k1 = k1;
    cfg.k2 = k2;
    cfg.k = k;
    cfg.reps = reps;
    cfg.seed = seed;
    cfg.input_kind = kind;
    cfg.method = method;
    cfg.k_known = k_known;
    cfg.which_elbow = 2;
    grid.push_back(cfg);
  };
  const InputKind kinds[] = {InputKind::Z, InputKind::U};
  const Method methods[] = {Method::krafty, Method::mase};

  if (name == "fig2") {
    for (int k = 4; k <= 16; ++k) {
      for (const auto kind : kinds) {
        for (const auto method : methods) {
          for (const bool known : {true, false}) push(1000, 20, 0.1, 4, 4, k, kind, method, known);
        }
      }
    }
  } else if (name == "fig3") {
    for (const int k : {4, 9, 15}) {
      for (const double sigma2 : {0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
        for (const auto kind : kinds) {
          for (const auto method : methods) push(1000, 20, sigma2, 4, 4, k, kind, method, false);
        }
      }
    }
  } else if (name == "fig4") {
    for (const int k : {4, 6, 8, 9, 10, 12, 14, 15, 16}) {
      for (const double sigma2 : {0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
        for (const auto kind : kinds) {
          for (const auto method : methods) push(1000, 20, sigma2, 4, 4, k, kind, method, false);
        }
      }
    }
  } else if (name == "fig5") {
    for (const int k : {6, 12}) {
      for (const double sigma2 : {0.01, 0.25, 1.0, 5.0}) {
        for (const int p : {2, 4, 6, 8, 10, 20, 30, 40, 50}) {
          for (const auto kind : kinds) {
            for (const auto method : methods) push(1000, p, sigma2, 4, 4, k, kind, method, false);
          }
        }
      }
    }
  } else if (name == "appendix-k1k2") {
    for (int k1 = 3; k1 <= 10; ++k1) {
      for (int k2 = 3; k2 <= 10; ++k2) {
        const int rules[] = {std::max(k1, k2), k1 + k2, (k1 * k2) / 2, k1 * k2};
        for (const int k : rules) {
          for (const auto kind : kinds) {
            for (const auto method : methods) {
              for (const bool known : {true, false}) push(1000, 101, 0.1, k1, k2, k, kind, method, known);
            }
          }
        }
      }
    }
  } else {
    throw input_error("unknown preset '" + name + "' (expected fig2, fig3, fig4, fig5, appendix-k1k2)");
  }
  return grid;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "appendix-k1k2"};
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::string trimmed;
    for (const char c : item) {
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    }
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

}  // namespace

std::vector<SimConfig> parse_config_text(const std::string& text) {
  std::map<std::string, std::vector<std::string>> fields;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    bool blank = true;
    for (const char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    }
    if (blank) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw input_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key;
    for (const char c : line.substr(0, eq)) {
      if (!std::isspace(static_cast<unsigned char>(c))) key += c;
    }
    const auto values = split_list(line.substr(eq + 1));
    if (key.empty() || values.empty()) {
      throw input_error("config line " + std::to_string(line_no) + ": empty key or value");
    }
    fields[key] = values;
  }

  static const std::set<std::string> known = {"n",   "p",    "sigma2", "k1",        "k2",
                                              "k",   "reps", "seed",   "input_kind", "method",
                                              "k_known", "which_elbow"};
  for (const auto& [key, values] : fields) {
    (void)values;
    if (known.find(key) == known.end()) throw input_error("config: unknown field '" + key + "'");
  }

  // Cross-product expansion over multi-valued keys; single-valued defaults.
  std::vector<SimConfig> grid{SimConfig{}};
  auto expand = [&](const std::string& key, auto apply) {
    const auto it = fields.find(key);
    if (it == fields.end()) return;
    std::vector<SimConfig> next;
    for (const auto& cfg : grid) {
      for (const auto& value : it->second) {
        SimConfig updated = cfg;
        apply(updated, value);
        next.push_back(updated);
      }
    }
    grid = std::move(next);
  };
  auto to_int = [](const std::string& v, const std::string& key) {
    try {
      return std::stoi(v);
    } catch (...) {
      throw input_error("config: field '" + key + "': not an integer: '" + v + "'");
    }
  };
  auto to_dbl = [](const std::string& v, const std::string& key) {
    try {
      return std::stod(v);
    } catch (...) {
      throw input_error("config: field '" + key + "': not a number: '" + v + "'");
    }
  };
  expand("n", [&](SimConfig& c, const std::string& v) { c.n = to_int(v, "n"); });
  expand("p", [&](SimConfig& c, const std::string& v) { c.p = to_int(v, "p"); });
  expand("sigma2", [&](SimConfig& c, const std::string& v) { c.sigma2 = to_dbl(v, "sigma2"); });
  expand("k1", [&](SimConfig& c, const std::string& v) { c.k1 = to_int(v, "k1"); });
  expand("k2", [&](SimConfig& c, const std::string& v) { c.k2 = to_int(v, "k2"); });
  expand("k", [&](SimConfig& c, const std::string& v) { c.k = to_int(v, "k"); });
  expand("reps", [&](SimConfig& c, const std::string& v) { c.reps = to_int(v, "reps"); });
  expand("seed", [&](SimConfig& c, const std::string& v) {
    try {
      c.seed = std::stoull(v);
    } catch (...) {
      throw input_error("config: field 'seed': not an integer: '" + v + "'");
    }
  });
  expand("which_elbow", [&](SimConfig& c, const std::string& v) { c.which_elbow = to_int(v, "which_elbow"); });
  expand("input_kind", [&](SimConfig& c, const std::string& v) {
    if (v == "Z" || v == "z") c.input_kind = InputKind::Z;
    else if (v == "U" || v == "u") c.input_kind = InputKind::U;
    else if (v == "X" || v == "x") c.input_kind = InputKind::X;
    else throw input_error("config: field 'input_kind': expected Z, U, or X, got '" + v + "'");
  });
  expand("method", [&](SimConfig& c, const std::string& v) {
    if (v == "krafty") c.method = Method::krafty;
    else if (v == "mase") c.method = Method::mase;
    else throw input_error("config: field 'method': expected krafty or mase, got '" + v + "'");
  });
  expand("k_known", [&](SimConfig& c, const std::string& v) {
    if (v == "true" || v == "1") c.k_known = true;
    else if (v == "false" || v == "0") c.k_known = false;
    else throw input_error("config: field 'k_known': expected true or false, got '" + v + "'");
  });

  for (const auto& cfg : grid) cfg.validate();
  return grid;
}

std::vector<SimConfig> load_config_file(const std::filesystem::path& path) {
  return parse_config_text(io::read_file(path));
}

std::string results_csv_text(const ExperimentResult& r) {
  std::ostringstream out;
  out << kConfigHeader << ",rep,ari,k_hat,abs_err_k,wall_ms,failed,error\n";
  std::size_t at = 0;
  for (const auto& summary : r.summaries) {
    for (int rep = 0; rep < summary.config.reps; ++rep, ++at) {
      const auto& record = r.records[at];
      out << csv_config_fields(summary.config) << ',' << record.rep << ','
          << io::format_double(record.ari) << ',' << record.k_hat << ',' << record.abs_err_k
          << ',' << io::format_double(record.wall_ms) << ',' << (record.failed ? "true" : "false")
          << ',' << record.error << '\n';
    }
  }
  return out.str();
}

std::string summary_csv_text(const ExperimentResult& r) {
  std::ostringstream out;
  out << kConfigHeader << ",reps_ok,failures,mean_ari,ci_low,ci_high,mean_abs_err_k\n";
  for (const auto& s : r.summaries) {
    out << csv_config_fields(s.config) << ',' << s.reps_ok << ',' << s.failures << ','
        << io::format_double(s.mean_ari) << ',' << io::format_double(s.ci_low) << ','
        << io::format_double(s.ci_high) << ',' << io::format_double(s.mean_abs_err_k) << '\n';
  }
  return out.str();
}

void write_results_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::write_file(path, results_csv_text(r));
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::write_file(path, summary_csv_text(r));
}

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::Z: return "Z";
    case InputKind::U: return "U";
    case InputKind::X: return "X";
  }
  return "?";
}

std::string to_string(Method method) {
  return method == Method::krafty ? "krafty" : "mase";
}

}  // namespace krafty
