#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scene4d/cues/cues.hpp"
#include "scene4d/io/pfm.hpp"
#include "scene4d/io/png_gray.hpp"

namespace scene4d {

struct BundleLoadStats {
  int invalid_depth_pixels = 0;  // non-positive or non-finite values in files
};

namespace detail {

inline std::string frame_file(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.%s", index, ext);
  return buf;
}

}  // namespace detail

inline void save_bundle(const CueBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "depth");
  fs::create_directories(fs::path(dir) / "masks");

  {
    nlohmann::json j;
    j["fx"] = bundle.init_intrinsics.fx;
    j["fy"] = bundle.init_intrinsics.fy;
    j["cx"] = bundle.init_intrinsics.cx;
    j["cy"] = bundle.init_intrinsics.cy;
    j["width"] = bundle.init_intrinsics.width;
    j["height"] = bundle.init_intrinsics.height;
    std::ofstream out(fs::path(dir) / "intrinsics.json");
    if (!out) throw Error("save_bundle: cannot write intrinsics.json");
    out << j.dump(2) << "\n";
  }

  for (const DepthFrame& d : bundle.depth) {
    PfmImage img;
    img.width = d.width;
    img.height = d.height;
    img.values.resize(d.values.size());
    for (size_t i = 0; i < d.values.size(); ++i) {
      // invalid pixels must stay non-positive on disk
      img.values[i] = d.validity[i] ? d.values[i]
                      : (d.values[i] > 0 ? -1.0f : d.values[i]);
    }
    write_pfm((fs::path(dir) / "depth" / detail::frame_file(d.frame_index, "pfm"))
                  .string(),
              img);
  }

  uint16_t max_label = 0;
  for (const MaskFrame& m : bundle.masks)
    for (uint16_t v : m.labels) max_label = std::max(max_label, v);
  for (const MaskFrame& m : bundle.masks) {
    GrayImage img;
    img.width = m.width;
    img.height = m.height;
    img.bit_depth = max_label > 255 ? 16 : 8;
    img.values = m.labels;
    write_png_gray(
        (fs::path(dir) / "masks" / detail::frame_file(m.frame_index, "png"))
            .string(),
        img);
  }

  {
    std::ofstream out(fs::path(dir) / "tracks.jsonl");
    if (!out) throw Error("save_bundle: cannot write tracks.jsonl");
    for (const Tracklet& t : bundle.tracklets) {
      nlohmann::json j;
      j["id"] = t.id;
      if (t.label == Tracklet::kStaticLabel) {
        j["label"] = "static";
      } else if (t.label > 0) {
        j["label"] = t.label;
      }  // unlabeled tracklets carry no label key
      nlohmann::json pts = nlohmann::json::array();
      for (size_t f = 0; f < t.points.size(); ++f) {
        if (t.visibility[f]) {
          pts.push_back({t.points[f].x(), t.points[f].y()});
        } else {
          pts.push_back(nullptr);
        }
      }
      j["points"] = pts;
      out << j.dump() << "\n";
    }
  }
}

inline CueBundle load_bundle(const std::string& dir,
                             BundleLoadStats* stats = nullptr) {
  namespace fs = std::filesystem;
  CueBundle bundle;

  {
    const fs::path p = fs::path(dir) / "intrinsics.json";
    std::ifstream in(p);
    if (!in) throw MissingFile("load_bundle: " + p.string());
    nlohmann::json j;
    try {
      in >> j;
      bundle.init_intrinsics.fx = j.at("fx").get<double>();
      bundle.init_intrinsics.fy = j.at("fy").get<double>();
      bundle.init_intrinsics.cx = j.at("cx").get<double>();
      bundle.init_intrinsics.cy = j.at("cy").get<double>();
      bundle.init_intrinsics.width = j.at("width").get<int>();
      bundle.init_intrinsics.height = j.at("height").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw CorruptHeader("load_bundle: " + p.string() + ": " + e.what());
    }
    bundle.init_intrinsics.validate();
  }
  const int w = bundle.init_intrinsics.width;
  const int h = bundle.init_intrinsics.height;

  int frames = 0;
  while (fs::exists(fs::path(dir) / "depth" / detail::frame_file(frames, "pfm")))
    ++frames;
  if (frames == 0)
    throw MissingFile("load_bundle: " +
                      (fs::path(dir) / "depth" / "000000.pfm").string());
  if (frames < 2)
    throw InconsistentDimensions(
        "load_bundle: single-frame bundle, need at least 2 frames");

  BundleLoadStats local_stats;
  for (int f = 0; f < frames; ++f) {
    const fs::path p = fs::path(dir) / "depth" / detail::frame_file(f, "pfm");
    const PfmImage img = read_pfm(p.string());
    if (img.width != w || img.height != h)
      throw InconsistentDimensions("load_bundle: " + p.string());
    DepthFrame d;
    d.frame_index = f;
    d.width = w;
    d.height = h;
    d.values = img.values;
    d.validity.resize(d.values.size());
    for (size_t i = 0; i < d.values.size(); ++i) {
      const bool ok = std::isfinite(d.values[i]) && d.values[i] > 0;
      d.validity[i] = ok;
      if (!ok) ++local_stats.invalid_depth_pixels;
    }
    bundle.depth.push_back(std::move(d));
  }

  for (int f = 0; f < frames; ++f) {
    const fs::path p = fs::path(dir) / "masks" / detail::frame_file(f, "png");
    const GrayImage img = read_png_gray(p.string());  // throws MissingFile
    if (img.width != w || img.height != h)
      throw InconsistentDimensions("load_bundle: " + p.string());
    MaskFrame m;
    m.frame_index = f;
    m.width = w;
    m.height = h;
    m.labels = img.values;
    bundle.masks.push_back(std::move(m));
  }
  if (fs::exists(fs::path(dir) / "masks" / detail::frame_file(frames, "png")))
    throw InconsistentDimensions("load_bundle: more masks than depth frames");

  {
    const fs::path p = fs::path(dir) / "tracks.jsonl";
    std::ifstream in(p);
    if (!in) throw MissingFile("load_bundle: " + p.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      Tracklet t;
      try {
        j = nlohmann::json::parse(line);
        t.id = j.at("id").get<int>();
        if (j.contains("label")) {
          if (j["label"].is_string()) {
            if (j["label"].get<std::string>() != "static")
              throw CorruptHeader("load_bundle: " + p.string() + " line " +
                                  std::to_string(line_no) + ": bad label");
            t.label = Tracklet::kStaticLabel;
          } else {
            t.label = j["label"].get<int>();
            if (t.label < 0)
              throw CorruptHeader("load_bundle: " + p.string() + " line " +
                                  std::to_string(line_no) + ": bad label");
          }
        }
        const nlohmann::json& pts = j.at("points");
        if (static_cast<int>(pts.size()) != frames)
          throw InconsistentDimensions(
              "load_bundle: " + p.string() + " line " +
              std::to_string(line_no) + ": tracklet length " +
              std::to_string(pts.size()) + " != frame count " +
              std::to_string(frames));
        for (const auto& e : pts) {
          if (e.is_null()) {
            t.points.emplace_back(0, 0);
            t.visibility.push_back(0);
          } else {
            t.points.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
            t.visibility.push_back(1);
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw CorruptHeader("load_bundle: " + p.string() + " line " +
                            std::to_string(line_no) + ": " + e.what());
      }
      if (t.visible_count() < 2)
        throw CorruptHeader("load_bundle: " + p.string() + " line " +
                            std::to_string(line_no) +
                            ": tracklet visible in fewer than 2 frames");
      bundle.tracklets.push_back(std::move(t));
    }
  }

  bundle.validate();
  if (stats) *stats = local_stats;
  return bundle;
}

}  // namespace scene4d
