// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/nn/params.hpp"

#include <fstream>
#include <random>

namespace tse::nn {

int ParamStore::add_uniform(const std::string& name, Eigen::Index rows,
                            Eigen::Index cols, Real scale) {
  if (index_.count(name))
    throw Error(ErrorCode::BadConfig, "duplicate parameter name " + name);
  Entry e;
  e.name = name;
  e.value = Eigen::MatrixXd::Zero(rows, cols);
  e.init_scale = scale;
  e.uniform = true;
  entries_.push_back(std::move(e));
  index_[name] = size() - 1;
  return size() - 1;
}

int ParamStore::add_constant(const std::string& name, Eigen::Index rows,
                             Eigen::Index cols, Real value) {
  if (index_.count(name))
    throw Error(ErrorCode::BadConfig, "duplicate parameter name " + name);
  Entry e;
  e.name = name;
  e.value = Eigen::MatrixXd::Constant(rows, cols, value);
  e.init_constant = value;
  e.uniform = false;
  entries_.push_back(std::move(e));
  index_[name] = size() - 1;
  return size() - 1;
}

int ParamStore::handle(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw Error(ErrorCode::BadConfig, "unknown parameter " + name);
  return it->second;
}

void ParamStore::randomize(uint64_t seed) {
  seed_ = seed;
  std::mt19937_64 rng(seed);
  for (Entry& e : entries_) {
    if (e.uniform) {
      std::uniform_real_distribution<Real> dist(-e.init_scale, e.init_scale);
      for (Eigen::Index i = 0; i < e.value.rows(); ++i)
        for (Eigen::Index j = 0; j < e.value.cols(); ++j) e.value(i, j) = dist(rng);
    } else {
      e.value.setConstant(e.init_constant);
    }
  }
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const Entry& e : entries_)
    out.add_constant(e.name, e.value.rows(), e.value.cols(), 0.0);
  return out;
}

void ParamStore::check_all_finite() const {
  for (const Entry& e : entries_)
    if (!e.value.allFinite())
      throw Error(ErrorCode::GradError, "non-finite values in " + e.name);
}

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& arch) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["seed"] = params.seed();
  j["arch"] = arch;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& e : params.entries()) {
    nlohmann::json t;
    t["name"] = e.name;
    t["rows"] = e.value.rows();
    t["cols"] = e.value.cols();
    std::vector<Real> data;
    data.reserve(e.value.size());
    for (Eigen::Index i = 0; i < e.value.rows(); ++i)
      for (Eigen::Index jx = 0; jx < e.value.cols(); ++jx) data.push_back(e.value(i, jx));
    t["data"] = data;
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::BadFile, "cannot write " + path);
  os << j.dump() << "\n";
}

nlohmann::json load_checkpoint_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::BadFile, "cannot open " + path);
  nlohmann::json j;
  is >> j;
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
    throw Error(ErrorCode::BadFile, path + ": unsupported checkpoint version");
  return j;
}

void load_into(ParamStore& params, const nlohmann::json& manifest) {
  for (const auto& t : manifest.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
    Eigen::MatrixXd& dst = params.value(name);  // throws on unknown name
    if (dst.rows() != rows || dst.cols() != cols)
      throw Error(ErrorCode::ShapeError,
                  "checkpoint tensor " + name + " has shape " + std::to_string(rows) +
                      "x" + std::to_string(cols) + ", expected " +
                      std::to_string(dst.rows()) + "x" + std::to_string(dst.cols()));
    const auto& data = t.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw Error(ErrorCode::ShapeError, "checkpoint tensor " + name + " truncated");
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) dst(i, j) = data[idx++].get<Real>();
  }
}

void load_checkpoint(const std::string& path, ParamStore& params, nlohmann::json* arch) {
  nlohmann::json manifest = load_checkpoint_manifest(path);
  if (arch) *arch = manifest.value("arch", nlohmann::json::object());
  load_into(params, manifest);
}

}  // namespace tse::nn
