#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "scene4d/cues/cues.hpp"
#include "scene4d/error.hpp"
#include "scene4d/synth/rng.hpp"

namespace scene4d {

/// Models the imperfections of real cue producers. All parameters are
/// magnitudes; a zero value disables that corruption entirely (no RNG draws),
/// so the all-zero spec is a byte-exact identity.
struct CorruptionSpec {
  double depth_scale_jitter_sigma = 0.0;  // per-frame lognormal sigma
  double depth_shift_jitter_sigma = 0.0;  // per-frame additive sigma
  double depth_pixel_noise_sigma = 0.0;   // per-pixel relative sigma
  double track_noise_sigma_px = 0.0;
  double track_dropout_rate = 0.0;
  int mask_erode_dilate_px = 0;

  void validate() const {
    if (depth_scale_jitter_sigma < 0 || depth_shift_jitter_sigma < 0 ||
        depth_pixel_noise_sigma < 0 || track_noise_sigma_px < 0 ||
        track_dropout_rate < 0 || mask_erode_dilate_px < 0)
      throw Error("corruption spec: negative magnitude");
    if (track_dropout_rate > 1.0)
      throw Error("corruption spec: dropout rate > 1");
  }
};

/// What was actually drawn, for tests that compare against the corruption.
struct CorruptionTrace {
  std::vector<double> depth_scales;
  std::vector<double> depth_shifts;
  size_t dropped_samples = 0;
  size_t dropped_tracklets = 0;
  size_t invalidated_pixels = 0;
};

namespace detail {

/// morphological opening (erode then dilate, Chebyshev radius r) of one
/// instance label; opening never grows beyond the original support
inline void open_label(MaskFrame* mask, uint16_t label, int r) {
  const int w = mask->width, h = mask->height;
  std::vector<char> original(size_t(w) * h, 0), eroded(size_t(w) * h, 0);
  for (size_t i = 0; i < original.size(); ++i)
    original[i] = mask->labels[i] == label ? 1 : 0;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      char keep = 1;
      for (int dy = -r; dy <= r && keep; ++dy)
        for (int dx = -r; dx <= r && keep; ++dx) {
          const int nx = x + dx, ny = y + dy;
          // outside the raster counts as background
          if (nx < 0 || nx >= w || ny < 0 || ny >= h || !original[size_t(ny) * w + nx])
            keep = 0;
        }
      eroded[size_t(y) * w + x] = keep;
    }

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t idx = size_t(y) * w + x;
      if (!original[idx]) continue;
      char hit = 0;
      for (int dy = -r; dy <= r && !hit; ++dy)
        for (int dx = -r; dx <= r && !hit; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && nx < w && ny >= 0 && ny < h && eroded[size_t(ny) * w + nx])
            hit = 1;
        }
      mask->labels[idx] = hit ? label : 0;
    }
}

}  // namespace detail

/// Applies the corruption model: per-frame depth scale/shift then per-pixel
/// relative noise, Gaussian track noise then sample dropout, mask opening.
/// Tracklets left with fewer than 2 visible samples are removed. The source
/// bundle (and any ground truth) is never modified.
inline CueBundle corrupt(const CueBundle& bundle, const CorruptionSpec& cspec,
                         uint64_t seed, CorruptionTrace* trace = nullptr) {
  cspec.validate();
  Rng rng(seed);
  CueBundle out = bundle;
  CorruptionTrace local;
  CorruptionTrace& tr = trace ? *trace : local;
  tr = CorruptionTrace{};

  for (DepthFrame& frame : out.depth) {
    const double scale = cspec.depth_scale_jitter_sigma > 0
                             ? std::exp(rng.normal(0.0, cspec.depth_scale_jitter_sigma))
                             : 1.0;
    const double shift = cspec.depth_shift_jitter_sigma > 0
                             ? rng.normal(0.0, cspec.depth_shift_jitter_sigma)
                             : 0.0;
    tr.depth_scales.push_back(scale);
    tr.depth_shifts.push_back(shift);
    const bool affine = cspec.depth_scale_jitter_sigma > 0 ||
                        cspec.depth_shift_jitter_sigma > 0;
    for (size_t i = 0; i < frame.values.size(); ++i) {
      if (!frame.validity[i]) continue;
      double v = double(frame.values[i]);
      if (affine) v = v * scale + shift;
      if (cspec.depth_pixel_noise_sigma > 0)
        v *= 1.0 + rng.normal(0.0, cspec.depth_pixel_noise_sigma);
      if (!(v > 0.0) || !std::isfinite(v)) {
        frame.values[i] = -1.0f;
        frame.validity[i] = 0;
        ++tr.invalidated_pixels;
      } else if (affine || cspec.depth_pixel_noise_sigma > 0) {
        frame.values[i] = float(v);
      }
    }
  }

  if (cspec.track_noise_sigma_px > 0 || cspec.track_dropout_rate > 0) {
    std::vector<Tracklet> kept;
    kept.reserve(out.tracklets.size());
    const double max_x = double(bundle.depth[0].width) - 0.5 - 1e-6;
    const double max_y = double(bundle.depth[0].height) - 0.5 - 1e-6;
    for (Tracklet& t : out.tracklets) {
      for (size_t f = 0; f < t.points.size(); ++f) {
        if (!t.visibility[f]) continue;
        if (cspec.track_noise_sigma_px > 0) {
          t.points[f].x() = std::clamp(
              t.points[f].x() + rng.normal(0.0, cspec.track_noise_sigma_px),
              -0.5, max_x);
          t.points[f].y() = std::clamp(
              t.points[f].y() + rng.normal(0.0, cspec.track_noise_sigma_px),
              -0.5, max_y);
        }
        if (cspec.track_dropout_rate > 0 && rng.uniform() < cspec.track_dropout_rate) {
          t.visibility[f] = 0;
          ++tr.dropped_samples;
        }
      }
      if (t.visible_count() >= 2) {
        kept.push_back(std::move(t));
      } else {
        ++tr.dropped_tracklets;
      }
    }
    out.tracklets = std::move(kept);
  }

  if (cspec.mask_erode_dilate_px > 0) {
    for (MaskFrame& mask : out.masks) {
      std::set<uint16_t> labels;
      for (uint16_t l : mask.labels)
        if (l > 0) labels.insert(l);
      for (uint16_t l : labels)
        detail::open_label(&mask, l, cspec.mask_erode_dilate_px);
    }
  }

  return out;
}

}  // namespace scene4d
