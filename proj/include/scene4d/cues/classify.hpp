#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "scene4d/cues/cues.hpp"

namespace scene4d {

/// Labels each tracklet from the masks: dynamic(k) if any visible sample lands
/// inside instance k's mask dilated by dilation_px (L-inf), static otherwise.
/// Tracklets touching more than one instance are dropped.
inline std::vector<Tracklet> classify_tracklets(
    const std::vector<Tracklet>& tracklets, const std::vector<MaskFrame>& masks,
    int dilation_px = 2) {
  std::vector<Tracklet> out;
  out.reserve(tracklets.size());
  for (const Tracklet& tr : tracklets) {
    if (tr.points.size() != masks.size())
      throw DimensionMismatch("tracklet " + std::to_string(tr.id) +
                              " length differs from mask count");
    std::set<int> touched;
    for (size_t t = 0; t < masks.size(); ++t) {
      if (!tr.visible_at(static_cast<int>(t))) continue;
      const MaskFrame& m = masks[t];
      const int px = static_cast<int>(std::lround(tr.points[t].x()));
      const int py = static_cast<int>(std::lround(tr.points[t].y()));
      if (px < 0 || px >= m.width || py < 0 || py >= m.height)
        throw DimensionMismatch("tracklet " + std::to_string(tr.id) +
                                " outside raster at frame " + std::to_string(t));
      const int x0 = std::max(0, px - dilation_px);
      const int x1 = std::min(m.width - 1, px + dilation_px);
      const int y0 = std::max(0, py - dilation_px);
      const int y1 = std::min(m.height - 1, py + dilation_px);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          if (m.at(x, y) > 0) touched.insert(m.at(x, y));
    }
    if (touched.size() > 1) continue;  // straddles instances, drop
    Tracklet labeled = tr;
    labeled.label = touched.empty() ? Tracklet::kStaticLabel : *touched.begin();
    out.push_back(std::move(labeled));
  }
  return out;
}

}  // namespace scene4d
