// Copyright 2026 The tse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef TSE_ACTIVITY_HPP_
#define TSE_ACTIVITY_HPP_

#include <string>
#include <vector>

#include "tse/types.hpp"

namespace tse {

struct ActivitySegment {
  std::string source_id;
  Real start_s = 0.0;
  Real end_s = 0.0;
};

// K x T binary activity. Speech classes come first in source-id order;
// the last row is the always-on noise class.
struct ActivityGrid {
  Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> active;  // K x T
  std::vector<std::string> source_ids;  // size K-1, parallel to speech rows

  int num_classes() const { return static_cast<int>(active.rows()); }
  Eigen::Index frames() const { return active.cols(); }
  bool is_active(int k, Eigen::Index t) const { return active(k, t) != 0; }
  int noise_class() const { return num_classes() - 1; }

  void validate() const;

  // Builds a grid with `frames` columns; a frame is active for a source iff
  // the frame's center time falls inside one of its segments. The noise row
  // is appended and always on.
  static ActivityGrid from_segments(const std::vector<ActivitySegment>& segments,
                                    const StftConfig& cfg, int sample_rate,
                                    Eigen::Index frames);

  static ActivityGrid all_active(int num_speech_classes, Eigen::Index frames);
};

// Activity JSON: a list of {"source_id": str, "start_s": real, "end_s": real}.
std::vector<ActivitySegment> read_activity_json(const std::string& path);
void write_activity_json(const std::string& path,
                         const std::vector<ActivitySegment>& segments);

}  // namespace tse

#endif  // TSE_ACTIVITY_HPP_
