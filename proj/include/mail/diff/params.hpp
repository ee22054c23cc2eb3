#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "mail/diff/autodiff.hpp"

namespace mail::diff {

/// Ordered, named collection of parameter leaves. Entries are handles, so two
/// sets may alias the same storage (this is how a shared encoder is wired).
/// Freezing is a property of the leaf and is seen through every alias.
template <class T>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    std::string group;
    Var<T> var;
  };

  Var<T> add(std::string name, Tensor<T> init, std::string group = {}) {
    auto v = Var<T>::parameter(std::move(init));
    add_existing(std::move(name), v, std::move(group));
    return v;
  }

  void add_existing(std::string name, Var<T> var, std::string group = {}) {
    if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    entries_.push_back({std::move(name), std::move(group), std::move(var)});
  }

  void extend(const ParamSet& other) {
    for (const auto& e : other.entries_) add_existing(e.name, e.var, e.group);
  }

  /// Freezes (or unfreezes) every parameter in `group`; an empty group name
  /// selects all parameters.
  void freeze(std::string_view group = {}, bool frozen = true) {
    for (auto& e : entries_) {
      if (group.empty() || e.group == group) e.var.set_frozen(frozen);
    }
  }

  bool is_frozen(std::string_view name) const { return get(name).frozen(); }

  bool all_frozen() const {
    for (const auto& e : entries_)
      if (!e.var.frozen()) return false;
    return !entries_.empty();
  }

  bool contains(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return true;
    return false;
  }

  Var<T> get(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return e.var;
    throw ConfigError("no parameter named '" + std::string(name) + "'");
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.var.size();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) e.var.clear_grad();
  }

  /// Scales gradients of trainable parameters so their joint L2 norm is at
  /// most `max_norm`. Returns the norm before clipping.
  double clip_grad_norm(double max_norm) {
    double sq = 0.0;
    for (auto& e : entries_) {
      if (e.var.frozen()) continue;
      for (T g : e.var.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
      const T factor = static_cast<T>(max_norm / norm);
      for (auto& e : entries_) {
        if (e.var.frozen()) continue;
        for (T& g : e.var.mutable_grad()) g *= factor;
      }
    }
    return norm;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace mail::diff
