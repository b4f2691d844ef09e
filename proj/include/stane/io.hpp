#pragma once

// DNET edge-list files and JSON parameter files.
//
// DNET (UTF-8 text): first line "N T", then one "t i j" line per undirected
// edge, all 1-based. Direction is ignored and duplicates are merged. Mask
// files share the format and list held-out pairs.

#include "stane/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace stane {

inline constexpr int kParamsSchemaVersion = 1;

namespace detail {

struct EdgeList {
  std::size_t n = 0;
  std::size_t t = 0;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> edges;  // (t, i, j), 0-based, i < j
  std::size_t duplicates = 0;
};

inline EdgeList read_edge_list(std::istream& in, const std::string& what) {
  EdgeList out;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<long long> tok;
    long long x;
    while (ls >> x) tok.push_back(x);
    if (!ls.eof()) throw FormatError(what + ":" + std::to_string(lineno) + ": non-integer token");
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 2 || tok[0] <= 0 || tok[1] <= 0)
        throw FormatError(what + ": malformed header (expected \"N T\")");
      out.n = static_cast<std::size_t>(tok[0]);
      out.t = static_cast<std::size_t>(tok[1]);
      have_header = true;
      continue;
    }
    const std::string where = what + ":" + std::to_string(lineno);
    if (tok.size() != 3) throw FormatError(where + ": expected \"t i j\"");
    if (tok[0] < 1 || static_cast<std::size_t>(tok[0]) > out.t)
      throw FormatError(where + ": time index out of range");
    if (tok[1] < 1 || tok[2] < 1 || static_cast<std::size_t>(tok[1]) > out.n ||
        static_cast<std::size_t>(tok[2]) > out.n)
      throw FormatError(where + ": node index exceeds N");
    if (tok[1] == tok[2]) throw FormatError(where + ": self-loop");
    auto i = static_cast<std::size_t>(tok[1] - 1), j = static_cast<std::size_t>(tok[2] - 1);
    if (i > j) std::swap(i, j);
    auto e = std::make_tuple(static_cast<std::size_t>(tok[0] - 1), i, j);
    if (!seen.insert(e).second) {
      ++out.duplicates;
      continue;
    }
    out.edges.push_back(e);
  }
  if (!have_header) throw FormatError(what + ": missing header");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace detail

/// Parse a DNET stream. `duplicates`, if given, receives the number of
/// repeated (t, {i, j}) lines that were merged.
inline AdjacencyTensor read_tensor(std::istream& in, const std::string& what = "<stream>",
                                   std::size_t* duplicates = nullptr) {
  detail::EdgeList el = detail::read_edge_list(in, what);
  const auto n = static_cast<Eigen::Index>(el.n);
  std::vector<Matrix> slices(el.t, Matrix::Zero(n, n));
  for (auto [t, i, j] : el.edges)
    slices[t](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        slices[t](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  if (duplicates) *duplicates = el.duplicates;
  return AdjacencyTensor(el.n, std::move(slices));
}

inline AdjacencyTensor load_tensor(const std::string& path, std::size_t* duplicates = nullptr) {
  auto in = detail::open_in(path);
  return read_tensor(in, path, duplicates);
}

/// Edges in ascending (t, i, j) order, so equal tensors give equal bytes.
inline void write_tensor(std::ostream& out, const AdjacencyTensor& a) {
  out << a.n_nodes() << ' ' << a.n_times() << '\n';
  const auto n = static_cast<Eigen::Index>(a.n_nodes());
  for (std::size_t t = 0; t < a.n_times(); ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (a.slice(t)(i, j) != 0.0) out << t + 1 << ' ' << i + 1 << ' ' << j + 1 << '\n';
}

inline void save_tensor(const AdjacencyTensor& a, const std::string& path) {
  auto out = detail::open_out(path);
  write_tensor(out, a);
  if (!out) throw IoError("write failed: " + path);
}

/// Held-out pairs (0-based, i < j) per slice from a mask file whose header
/// must match the tensor dimensions.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> load_holdout_pairs(
    const std::string& path, std::size_t n, std::size_t t) {
  auto in = detail::open_in(path);
  detail::EdgeList el = detail::read_edge_list(in, path);
  if (el.n != n || el.t != t) throw FormatError(path + ": mask dimensions do not match tensor");
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(t);
  for (auto [s, i, j] : el.edges) out[s].emplace_back(i, j);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

/// Observation mask (1 = observed) with the listed pairs removed.
inline std::vector<Matrix> mask_from_pairs(
    std::size_t n, const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& held_out) {
  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<Matrix> mask(held_out.size(), Matrix::Ones(nn, nn));
  for (std::size_t t = 0; t < held_out.size(); ++t)
    for (auto [i, j] : held_out[t])
      mask[t](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          mask[t](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 0.0;
  return mask;
}

inline void save_holdout_pairs(const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& held_out,
                               std::size_t n, const std::string& path) {
  auto out = detail::open_out(path);
  out << n << ' ' << held_out.size() << '\n';
  for (std::size_t t = 0; t < held_out.size(); ++t)
    for (auto [i, j] : held_out[t]) out << t + 1 << ' ' << i + 1 << ' ' << j + 1 << '\n';
  if (!out) throw IoError("write failed: " + path);
}

/// Sidecar "index name" lines mapping 1-based node indices to names.
inline std::vector<std::string> load_node_names(const std::string& path, std::size_t n) {
  auto in = detail::open_in(path);
  std::vector<std::string> names(n);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    long long idx;
    if (!(ls >> idx)) continue;
    if (idx < 1 || static_cast<std::size_t>(idx) > n) throw FormatError(path + ": node index exceeds N");
    std::string name;
    std::getline(ls >> std::ws, name);
    names[static_cast<std::size_t>(idx - 1)] = name;
  }
  return names;
}

// --- parameter files -------------------------------------------------------

namespace detail {

inline nlohmann::json matrix_rows(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Matrix matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                          const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw FormatError("params: " + name + " has wrong row count");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw FormatError("params: " + name + " has wrong column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace detail

/// JSON document with keys {schema_version, n_nodes, n_times, r_s, r_d, k,
/// z, u, v, labels}; z and u are row-major nested arrays. With per_time set
/// (simplified fits) the labels key is omitted and g_t = t on load.
inline nlohmann::json params_to_json(const ModelParams& p, bool per_time = false) {
  nlohmann::json j;
  j["schema_version"] = kParamsSchemaVersion;
  j["n_nodes"] = p.n_nodes();
  j["n_times"] = p.n_times();
  j["r_s"] = p.r_s();
  j["r_d"] = p.r_d();
  j["k"] = p.n_groups();
  j["z"] = detail::matrix_rows(p.z);
  j["u"] = nlohmann::json::array();
  for (const Matrix& uk : p.u) j["u"].push_back(detail::matrix_rows(uk));
  j["v"] = nlohmann::json::array();
  for (const Vector& vt : p.v) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index r = 0; r < vt.size(); ++r) row.push_back(vt(r));
    j["v"].push_back(std::move(row));
  }
  if (per_time)
    j["per_time"] = true;
  else
    j["labels"] = p.groups.labels;
  return j;
}

inline ModelParams params_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema_version", -1) != kParamsSchemaVersion)
      throw FormatError("params: unsupported schema_version");
    const auto n = j.at("n_nodes").get<Eigen::Index>();
    const auto t = j.at("n_times").get<std::size_t>();
    const auto rs = j.at("r_s").get<Eigen::Index>();
    const auto rd = j.at("r_d").get<Eigen::Index>();
    const auto k = j.at("k").get<std::size_t>();
    ModelParams p;
    p.z = detail::matrix_from(j.at("z"), n, rs, "z");
    const auto& ju = j.at("u");
    if (!ju.is_array() || ju.size() != k) throw FormatError("params: u must hold k matrices");
    for (std::size_t g = 0; g < k; ++g) p.u.push_back(detail::matrix_from(ju[g], n, rd, "u"));
    const auto& jv = j.at("v");
    if (!jv.is_array() || jv.size() != t) throw FormatError("params: v must hold n_times vectors");
    for (const auto& row : jv) {
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rd)
        throw FormatError("params: R_D mismatch between u and v");
      Vector vt(rd);
      for (Eigen::Index r = 0; r < rd; ++r) vt(r) = row[static_cast<std::size_t>(r)].get<double>();
      p.v.push_back(std::move(vt));
    }
    if (j.value("per_time", false)) {
      if (k != t) throw FormatError("params: per-time file needs k == n_times");
      p.groups = GroupLabels::identity(t);
    } else {
      auto labels = j.at("labels").get<std::vector<int>>();
      if (labels.size() != t) throw FormatError("params: labels length must equal n_times");
      for (int g : labels)
        if (g < 1 || static_cast<std::size_t>(g) > k) throw FormatError("params: labels are 1-based in 1..k");
      p.groups = GroupLabels(std::move(labels), static_cast<int>(k));
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("params: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
}

inline void save_params(const ModelParams& p, const std::string& path, bool per_time = false) {
  auto out = detail::open_out(path);
  out << params_to_json(p, per_time).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline ModelParams load_params(const std::string& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return params_from_json(j);
}

}  // namespace stane
