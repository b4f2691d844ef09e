#pragma once

// Core containers for dynamic networks and STANE model parameters.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stane {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps these onto exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// T symmetric binary N x N snapshots over a common node set, with an
/// optional observation mask (1 = observed, 0 = held out).
///
/// Slices are stored as dense doubles so that likelihood kernels can work on
/// them directly. `weight(t)` is the per-entry likelihood weight: the mask
/// with its diagonal cleared, or 1 - I when no mask is present.
class AdjacencyTensor {
 public:
  AdjacencyTensor() = default;

  AdjacencyTensor(std::size_t n_nodes, std::vector<Matrix> slices,
                  std::optional<std::vector<Matrix>> mask = std::nullopt)
      : n_(n_nodes), slices_(std::move(slices)), mask_(std::move(mask)) {
    validate();
    build_weights();
  }

  /// N zero slices.
  static AdjacencyTensor zeros(std::size_t n_nodes, std::size_t n_times) {
    return AdjacencyTensor(n_nodes,
                           std::vector<Matrix>(n_times, Matrix::Zero(n_nodes, n_nodes)));
  }

  std::size_t n_nodes() const { return n_; }
  std::size_t n_times() const { return slices_.size(); }
  const Matrix& slice(std::size_t t) const { return slices_.at(t); }
  const std::vector<Matrix>& slices() const { return slices_; }
  bool has_mask() const { return mask_.has_value(); }
  const std::optional<std::vector<Matrix>>& mask() const { return mask_; }
  const Matrix& weight(std::size_t t) const { return weights_.at(t); }

  bool observed(std::size_t t, std::size_t i, std::size_t j) const {
    return i != j && (!mask_ || (*mask_)[t](i, j) != 0.0);
  }

  /// Same edges with a new mask (1 = observed).
  AdjacencyTensor with_mask(std::vector<Matrix> mask) const {
    return AdjacencyTensor(n_, slices_, std::move(mask));
  }
  AdjacencyTensor without_mask() const { return AdjacencyTensor(n_, slices_); }

  std::size_t edge_count() const {
    double s = 0.0;
    for (const auto& a : slices_) s += a.sum();
    return static_cast<std::size_t>(std::llround(s / 2.0));
  }

  bool operator==(const AdjacencyTensor& o) const {
    if (n_ != o.n_ || slices_.size() != o.slices_.size() || has_mask() != o.has_mask())
      return false;
    for (std::size_t t = 0; t < slices_.size(); ++t) {
      if (slices_[t] != o.slices_[t]) return false;
      if (mask_ && (*mask_)[t] != (*o.mask_)[t]) return false;
    }
    return true;
  }

 private:
  void validate() const {
    if (n_ == 0) throw FormatError("tensor must have at least one node");
    if (slices_.empty()) throw FormatError("tensor must have at least one slice");
    const auto n = static_cast<Eigen::Index>(n_);
    for (std::size_t t = 0; t < slices_.size(); ++t) {
      const Matrix& a = slices_[t];
      if (a.rows() != n || a.cols() != n)
        throw FormatError("slice " + std::to_string(t + 1) + " has wrong shape");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (a(j, j) != 0.0)
          throw FormatError("self-loop in slice " + std::to_string(t + 1));
        for (Eigen::Index i = 0; i < n; ++i) {
          const double x = a(i, j);
          if (x != 0.0 && x != 1.0) throw FormatError("non-binary adjacency entry");
          if (x != a(j, i)) throw FormatError("asymmetric adjacency slice");
        }
      }
    }
    if (mask_) {
      if (mask_->size() != slices_.size()) throw FormatError("mask slice count mismatch");
      for (const Matrix& m : *mask_) {
        if (m.rows() != n || m.cols() != n) throw FormatError("mask has wrong shape");
        if (m != m.transpose()) throw FormatError("mask must be symmetric");
      }
    }
  }

  void build_weights() {
    weights_.clear();
    weights_.reserve(slices_.size());
    const auto n = static_cast<Eigen::Index>(n_);
    for (std::size_t t = 0; t < slices_.size(); ++t) {
      Matrix w = mask_ ? Matrix((*mask_)[t]) : Matrix::Ones(n, n);
      w.diagonal().setZero();
      weights_.push_back(std::move(w));
    }
  }

  std::size_t n_ = 0;
  std::vector<Matrix> slices_;
  std::optional<std::vector<Matrix>> mask_;
  std::vector<Matrix> weights_;
};

/// Temporal group labels, 1-based in {1..K} at the interface.
struct GroupLabels {
  std::vector<int> labels;
  int n_groups = 1;

  GroupLabels() = default;
  GroupLabels(std::vector<int> l, int k) : labels(std::move(l)), n_groups(k) { validate(); }

  static GroupLabels constant(std::size_t t, int k = 1) {
    return GroupLabels(std::vector<int>(t, 1), k);
  }
  /// g_t = t, the grouping used by the simplified (per-time) model.
  static GroupLabels identity(std::size_t t) {
    std::vector<int> l(t);
    for (std::size_t i = 0; i < t; ++i) l[i] = static_cast<int>(i) + 1;
    return GroupLabels(std::move(l), static_cast<int>(t));
  }

  std::size_t size() const { return labels.size(); }
  /// 0-based group index of time t.
  std::size_t group_of(std::size_t t) const { return static_cast<std::size_t>(labels.at(t) - 1); }

  std::vector<std::size_t> members(std::size_t k) const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < labels.size(); ++t)
      if (group_of(t) == k) out.push_back(t);
    return out;
  }

  void validate() const {
    if (n_groups < 1) throw ConfigError("number of groups must be positive");
    for (int g : labels)
      if (g < 1 || g > n_groups)
        throw ConfigError("group label " + std::to_string(g) + " outside 1.." +
                          std::to_string(n_groups));
  }

  bool operator==(const GroupLabels&) const = default;
};

/// Z (N x R_S), U^(k) (N x R_D) per group, diag(V^(t)) per time, labels.
struct ModelParams {
  Matrix z;
  std::vector<Matrix> u;
  std::vector<Vector> v;
  GroupLabels groups;

  std::size_t n_nodes() const { return static_cast<std::size_t>(z.rows()); }
  std::size_t n_times() const { return v.size(); }
  std::size_t n_groups() const { return u.size(); }
  Eigen::Index r_s() const { return z.cols(); }
  Eigen::Index r_d() const { return u.empty() ? Eigen::Index{0} : u.front().cols(); }

  void validate() const {
    const Eigen::Index n = z.rows();
    if (n == 0) throw FormatError("params: empty Z");
    if (u.empty()) throw FormatError("params: no group embeddings");
    if (static_cast<std::size_t>(groups.n_groups) != u.size())
      throw FormatError("params: group count does not match U list");
    if (groups.size() != v.size()) throw FormatError("params: label count does not match V list");
    const Eigen::Index rd = u.front().cols();
    for (const Matrix& uk : u)
      if (uk.rows() != n || uk.cols() != rd) throw FormatError("params: inconsistent U shape");
    for (const Vector& vt : v) {
      if (vt.size() != rd) throw FormatError("params: R_D mismatch between U and V");
      if (!vt.allFinite()) throw FormatError("params: non-finite V entry");
    }
    if (!z.allFinite()) throw FormatError("params: non-finite Z entry");
    groups.validate();
  }

  /// Group embedding in force at time t.
  const Matrix& u_at(std::size_t t) const { return u.at(groups.group_of(t)); }

  bool operator==(const ModelParams& o) const {
    return z == o.z && u == o.u && v == o.v && groups == o.groups;
  }
};

/// Settings for a single projected-gradient fit.
struct FitConfig {
  double eta = 0.025;
  int max_iter = 2000;
  double tol = 1e-7;
  double mu = 0.0;     // MCP level; 0 disables the penalty
  double gamma = 3.0;  // MCP shape
  double c0 = 0.1;     // BIC_2 constant
  std::uint64_t seed = 1;
  bool reassign = true;  // false for the simplified model (g_t = t fixed)

  /// Settings for the simplified (per-time) model, used alone or as the
  /// pre-fit of the initialization pipeline. Each U^(t) sees a single slice,
  /// so a larger step stays stable there.
  static FitConfig simplified_defaults() {
    FitConfig c;
    c.eta = 0.1;
    c.max_iter = 4000;
    c.reassign = false;
    return c;
  }

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(gamma > 1.0)) throw ConfigError("gamma must exceed 1");
    if (!(mu >= 0.0)) throw ConfigError("mu must be non-negative");
    if (max_iter < 0) throw ConfigError("max_iter must be non-negative");
  }
};

}  // namespace stane
