// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tse/activity.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace tse {

void ActivityGrid::validate() const {
  if (active.rows() < 1 || active.cols() < 1)
    throw Error(ErrorCode::ShapeError, "activity grid is empty");
  const int noise = noise_class();
  for (Eigen::Index t = 0; t < frames(); ++t) {
    if (active(noise, t) == 0)
      throw Error(ErrorCode::ShapeError, "noise row must be all ones");
  }
  if (static_cast<int>(source_ids.size()) != num_classes() - 1)
    throw Error(ErrorCode::ShapeError, "source id list does not match class count");
}

ActivityGrid ActivityGrid::from_segments(const std::vector<ActivitySegment>& segments,
                                         const StftConfig& cfg, int sample_rate,
                                         Eigen::Index frames) {
  std::set<std::string> ids;
  for (const auto& seg : segments) ids.insert(seg.source_id);

  ActivityGrid grid;
  grid.source_ids.assign(ids.begin(), ids.end());
  const int k = static_cast<int>(grid.source_ids.size()) + 1;
  grid.active.setZero(k, frames);
  grid.active.row(k - 1).setOnes();

  const int hop = cfg.hop_samples(sample_rate);
  for (const auto& seg : segments) {
    const int row = static_cast<int>(
        std::lower_bound(grid.source_ids.begin(), grid.source_ids.end(), seg.source_id) -
        grid.source_ids.begin());
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Real center_s = static_cast<Real>(t) * hop / sample_rate;
      if (center_s >= seg.start_s && center_s < seg.end_s) grid.active(row, t) = 1;
    }
  }
  return grid;
}

ActivityGrid ActivityGrid::all_active(int num_speech_classes, Eigen::Index frames) {
  ActivityGrid grid;
  grid.active.setOnes(num_speech_classes + 1, frames);
  for (int i = 0; i < num_speech_classes; ++i)
    grid.source_ids.push_back("spk" + std::to_string(i));
  return grid;
}

std::vector<ActivitySegment> read_activity_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::BadFile, "cannot open " + path);
  nlohmann::json j;
  is >> j;
  if (!j.is_array()) throw Error(ErrorCode::BadFile, path + ": expected a JSON array");
  std::vector<ActivitySegment> segments;
  for (const auto& item : j) {
    ActivitySegment seg;
    seg.source_id = item.at("source_id").get<std::string>();
    seg.start_s = item.at("start_s").get<Real>();
    seg.end_s = item.at("end_s").get<Real>();
    segments.push_back(std::move(seg));
  }
  return segments;
}

void write_activity_json(const std::string& path,
                         const std::vector<ActivitySegment>& segments) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& seg : segments)
    j.push_back({{"source_id", seg.source_id}, {"start_s", seg.start_s}, {"end_s", seg.end_s}});
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::BadFile, "cannot write " + path);
  os << j.dump(2) << "\n";
}

}  // namespace tse
