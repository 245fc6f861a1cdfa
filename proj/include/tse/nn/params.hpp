// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_NN_PARAMS_HPP_
#define TSE_NN_PARAMS_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "tse/error.hpp"
#include "tse/types.hpp"

#include <json.hpp>

namespace tse::nn {

// Named parameter tensors with their initialization recipe. Layers register
// tensors at construction; randomize() then fills them deterministically in
// registration order from one seed.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Eigen::MatrixXd value;
    Real init_scale = 0.0;     // uniform in [-scale, scale] when uniform
    Real init_constant = 0.0;  // used when !uniform
    bool uniform = true;
  };

  int add_uniform(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                  Real scale);
  int add_constant(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                   Real value);

  int handle(const std::string& name) const;
  Eigen::MatrixXd& value(int h) { return entries_[h].value; }
  const Eigen::MatrixXd& value(int h) const { return entries_[h].value; }
  Eigen::MatrixXd& value(const std::string& name) { return entries_[handle(name)].value; }
  const Eigen::MatrixXd& value(const std::string& name) const {
    return entries_[handle(name)].value;
  }

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  // Deterministic init; records the seed.
  void randomize(uint64_t seed);
  uint64_t seed() const { return seed_; }

  // Same names and shapes, all zeros; used for gradients and optimizer state.
  ParamStore zeros_like() const;

  void check_all_finite() const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, int> index_;
  uint64_t seed_ = 0;
};

// Versioned JSON checkpoint: {format_version, seed, arch, tensors:[...]}
// with row-major tensor data. Loading into a built store rejects unknown
// names and shape mismatches.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& arch);
nlohmann::json load_checkpoint_manifest(const std::string& path);
void load_into(ParamStore& params, const nlohmann::json& manifest);
void load_checkpoint(const std::string& path, ParamStore& params, nlohmann::json* arch = nullptr);

}  // namespace tse::nn

#endif  // TSE_NN_PARAMS_HPP_
