#include "krafty/ingest.hpp"

#include "krafty/io.hpp"
#include "krafty/linalg.hpp"
#include "krafty/rng.hpp"
#include "krafty/selectk.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace krafty {

namespace {

struct EdgeRow {
  std::string source;
  std::string target;
  double weight;
};

std::string strip(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) --b;
  return s.substr(a, b - a);
}

std::vector<EdgeRow> parse_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::vector<EdgeRow> edges;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = trimmed.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(trimmed.substr(start));
        break;
      }
      fields.push_back(trimmed.substr(start, pos - start));
      start = pos + 1;
    }
    if (!saw_header) {
      if (fields.size() != 3 || strip(fields[0]) != "source" || strip(fields[1]) != "target" ||
          strip(fields[2]) != "weight") {
        throw input_error(path.string() + ":" + std::to_string(line_no) +
                          ": expected header 'source,target,weight'");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw input_error(path.string() + ":" + std::to_string(line_no) +
                        ": expected source,target,weight");
    }
    EdgeRow row;
    row.source = strip(fields[0]);
    row.target = strip(fields[1]);
    if (row.source.empty() || row.target.empty()) {
      throw input_error(path.string() + ":" + std::to_string(line_no) + ": empty vertex name");
    }
    const std::string wtok = strip(fields[2]);
    char* end = nullptr;
    row.weight = std::strtod(wtok.c_str(), &end);
    if (wtok.empty() || end != wtok.c_str() + wtok.size() || !std::isfinite(row.weight)) {
      throw input_error(path.string() + ":" + std::to_string(line_no) +
                        ": bad weight '" + fields[2] + "'");
    }
    if (row.weight < 0.0) {
      throw input_error(path.string() + ":" + std::to_string(line_no) + ": negative weight");
    }
    edges.push_back(std::move(row));
  }
  if (!saw_header) throw input_error(path.string() + ": missing 'source,target,weight' header");
  return edges;
}

}  // namespace

WeightedNetwork load_edge_list(const std::filesystem::path& path,
                               const std::optional<std::vector<std::string>>& vertex_universe) {
  const auto edges = parse_edges(path);

  std::vector<std::string> names;
  if (vertex_universe.has_value()) {
    names = *vertex_universe;
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw input_error("vertex universe contains duplicates");
  } else {
    std::set<std::string> seen;
    for (const auto& e : edges) {
      seen.insert(e.source);
      seen.insert(e.target);
    }
    names.assign(seen.begin(), seen.end());
  }
  if (names.empty()) throw input_error(path.string() + ": no vertices");

  std::map<std::string, Index> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<Index>(i);

  WeightedNetwork net;
  net.vertex_names = std::move(names);
  net.adjacency = Matrix::Zero(static_cast<Index>(net.vertex_names.size()),
                               static_cast<Index>(net.vertex_names.size()));
  for (const auto& e : edges) {
    const auto src = index.find(e.source);
    const auto dst = index.find(e.target);
    if (src == index.end() || dst == index.end()) {
      const std::string& missing = src == index.end() ? e.source : e.target;
      throw input_error(path.string() + ": vertex '" + missing + "' not in the given universe");
    }
    net.adjacency(src->second, dst->second) += e.weight;
  }
  return net;
}

void save_edge_list(const std::filesystem::path& path, const WeightedNetwork& net) {
  std::ostringstream out;
  out << "source,target,weight\n";
  for (Index i = 0; i < net.adjacency.rows(); ++i) {
    for (Index j = 0; j < net.adjacency.cols(); ++j) {
      if (net.adjacency(i, j) != 0.0) {
        out << net.vertex_names[static_cast<std::size_t>(i)] << ','
            << net.vertex_names[static_cast<std::size_t>(j)] << ','
            << io::format_double(net.adjacency(i, j)) << '\n';
      }
    }
  }
  io::write_file(path, out.str());
}

std::vector<std::string> load_vertex_universe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const std::string name = strip(line);
    if (!name.empty()) names.push_back(name);
  }
  if (names.empty()) throw input_error(path.string() + ": empty vertex universe");
  return names;
}

DirectedEmbeddings exporter_importer_embeddings(const WeightedNetwork& net, Index d) {
  const Index n = net.adjacency.rows();
  if (net.adjacency.cols() != n) throw input_error("network adjacency must be square");
  if (d < 1 || d > n) {
    throw input_error("embedding dimension d = " + std::to_string(d) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  const SvdResult svd = svd_k(net.adjacency, d);

  Matrix exporter = svd.left.matrix;
  Matrix importer = svd.right;
  for (Index j = 0; j < d; ++j) {
    const double scale = std::sqrt(std::max(svd.values[static_cast<std::size_t>(j)], 0.0));
    exporter.col(j) *= scale;
    importer.col(j) *= scale;
  }

  DirectedEmbeddings out;
  std::set<int> flagged;
  auto normalize_rows = [&](Matrix& m, auto is_isolated) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (is_isolated(i)) {
        m.row(i).setZero();
        flagged.insert(static_cast<int>(i));
        continue;
      }
      const double norm = m.row(i).norm();
      if (norm > 0.0) m.row(i) /= norm;
    }
  };
  normalize_rows(exporter, [&](Index i) { return net.adjacency.row(i).cwiseAbs().maxCoeff() == 0.0; });
  normalize_rows(importer, [&](Index i) { return net.adjacency.col(i).cwiseAbs().maxCoeff() == 0.0; });

  out.exporter = Embedding::from_matrix(std::move(exporter));
  out.importer = Embedding::from_matrix(std::move(importer));
  out.flagged.assign(flagged.begin(), flagged.end());
  return out;
}

int suggest_embedding_dimension(const WeightedNetwork& net, int which) {
  const Index n = net.adjacency.rows();
  if (n < 3) throw input_error("suggest_embedding_dimension: need at least three vertices");
  const Spectrum s(svd_k(net.adjacency, n).values);
  return profile_likelihood_elbow(s, which).k_hat;
}

TradeResult trade_pipeline(const std::vector<TradeView>& views, std::optional<int> k,
                           Method method, std::uint64_t seed, const JointOptions& base_opts) {
  if (views.size() < 2) throw input_error("trade: at least two views required");
  const auto& names = views.front().net.vertex_names;
  for (std::size_t v = 1; v < views.size(); ++v) {
    if (views[v].net.vertex_names != names) {
      std::set<std::string> a(names.begin(), names.end());
      std::set<std::string> b(views[v].net.vertex_names.begin(), views[v].net.vertex_names.end());
      std::vector<std::string> only_a;
      std::vector<std::string> only_b;
      std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
      std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
      std::ostringstream msg;
      msg << "trade: vertex sets differ between view 0 and view " << v;
      if (!only_a.empty() || !only_b.empty()) {
        msg << "; only in view 0:";
        for (const auto& s : only_a) msg << ' ' << s;
        msg << "; only in view " << v << ':';
        for (const auto& s : only_b) msg << ' ' << s;
      } else {
        msg << " (same names, different order)";
      }
      throw input_error(msg.str());
    }
  }
  const Index n = static_cast<Index>(names.size());

  // Per-view role embeddings; a vertex isolated in any used role is
  // excluded from clustering and reported separately.
  std::vector<Matrix> role_rows;
  std::set<int> excluded;
  for (const auto& view : views) {
    DirectedEmbeddings emb = exporter_importer_embeddings(view.net, view.d);
    const Matrix& rows = view.role == TradeRole::exporter ? emb.exporter.matrix : emb.importer.matrix;
    for (Index i = 0; i < n; ++i) {
      if (rows.row(i).cwiseAbs().maxCoeff() == 0.0) excluded.insert(static_cast<int>(i));
    }
    role_rows.push_back(rows);
  }
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(n); ++i) {
    if (excluded.find(i) == excluded.end()) kept.push_back(i);
  }
  if (static_cast<int>(kept.size()) < 2) throw input_error("trade: fewer than two non-isolated vertices");

  std::vector<ViewInput> inputs;
  std::vector<Assignment> view_assignments;
  for (std::size_t v = 0; v < views.size(); ++v) {
    Matrix sub(static_cast<Index>(kept.size()), role_rows[v].cols());
    for (std::size_t r = 0; r < kept.size(); ++r) sub.row(static_cast<Index>(r)) = role_rows[v].row(kept[r]);
    const KMeansResult km = kmeans(sub, views[v].k, 10, 100, Rng::derive(seed, v));
    view_assignments.push_back(km.assignment);
    inputs.push_back(ViewInput::from_assignment(km.assignment));
  }

  JointOptions opts = base_opts;
  opts.k = k;
  opts.seed = Rng::derive(seed, 0x77ADEULL);
  JointResult joint_result = method == Method::krafty ? krafty(inputs, opts) : mase(inputs, opts);

  TradeResult out{std::move(joint_result), std::move(view_assignments), {}, {}};
  for (const int i : kept) out.vertex_names.push_back(names[static_cast<std::size_t>(i)]);
  for (const int i : excluded) out.excluded.push_back(names[static_cast<std::size_t>(i)]);
  return out;
}

std::string to_string(TradeRole role) {
  return role == TradeRole::exporter ? "exporter" : "importer";
}

}  // namespace krafty
