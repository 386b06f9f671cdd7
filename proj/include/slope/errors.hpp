#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slope {

/// Eigenvalue tuple left the cone: S_i(lambda) <= 0 for the reported index.
class ConeViolation : public std::domain_error {
 public:
  ConeViolation(int failing_index, double s_value)
      : std::domain_error("cone violation: S_" + std::to_string(failing_index) +
                          " = " + std::to_string(s_value) + " <= 0"),
        failing_index_(failing_index),
        s_value_(s_value) {}

  int failing_index() const { return failing_index_; }
  double s_value() const { return s_value_; }

 private:
  int failing_index_;
  double s_value_;
};

/// A field operation required lambda(theta_u) in Gamma at every node and
/// found a node where it is not (or the margin is degenerate).
class AdmissibilityError : public std::runtime_error {
 public:
  AdmissibilityError(std::size_t worst_node, double margin)
      : std::runtime_error("inadmissible field: worst node " +
                           std::to_string(worst_node) + " has cone margin " +
                           std::to_string(margin)),
        worst_node_(worst_node),
        margin_(margin) {}

  std::size_t worst_node() const { return worst_node_; }
  double margin() const { return margin_; }

 private:
  std::size_t worst_node_;
  double margin_;
};

/// Metric tensor failed the positive-definiteness check at a node.
class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(std::size_t node)
      : std::runtime_error("matrix not positive definite at node " +
                           std::to_string(node)),
        node_(node) {}

  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

class LinearSolveError : public std::runtime_error {
 public:
  explicit LinearSolveError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace slope
