#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "scene4d/io/pfm.hpp"
#include "scene4d/io/ply.hpp"
#include "scene4d/io/png_gray.hpp"
#include "scene4d/io/tum.hpp"
#include "support/oracles.hpp"

using namespace scene4d;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "scene4d_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Deliberately naive PLY parser used only to check the writer's output.
struct PlyContents {
  std::vector<Eigen::Vector3f> points;
  std::vector<Rgb> colors;
};

PlyContents parse_ply_naive(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::string line;
  size_t count = 0;
  std::vector<std::string> props;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "ply");
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "format binary_little_endian 1.0");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "element") {
      std::string name;
      ls >> name >> count;
      REQUIRE(name == "vertex");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    }
  }
  REQUIRE(props == std::vector<std::string>{"float x", "float y", "float z",
                                            "uchar red", "uchar green",
                                            "uchar blue"});
  PlyContents out;
  for (size_t i = 0; i < count; ++i) {
    float xyz[3];
    uint8_t rgb[3];
    in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
    in.read(reinterpret_cast<char*>(rgb), sizeof(rgb));
    REQUIRE(in.good());
    out.points.emplace_back(xyz[0], xyz[1], xyz[2]);
    out.colors.push_back({rgb[0], rgb[1], rgb[2]});
  }
  return out;
}

}  // namespace

TEST_CASE("pfm round trip is bit exact", "[io]") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<float> d(0.01f, 100.0f);
  PfmImage img;
  img.width = 17;
  img.height = 9;
  img.values.resize(17 * 9);
  for (float& v : img.values) v = d(rng);

  const fs::path p = tmp_dir() / "a.pfm";
  write_pfm(p.string(), img);
  const PfmImage back = read_pfm(p.string());
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  REQUIRE(std::memcmp(back.values.data(), img.values.data(),
                      img.values.size() * sizeof(float)) == 0);
}

TEST_CASE("pfm on-disk layout: header then bottom-up rows", "[io]") {
  PfmImage img;
  img.width = 2;
  img.height = 2;
  img.values = {1.0f, 2.0f,   // top row
                3.0f, 4.0f};  // bottom row
  const fs::path p = tmp_dir() / "layout.pfm";
  write_pfm(p.string(), img);

  const std::string raw = read_all(p);
  const std::string header = "Pf\n2 2\n-1.0\n";
  REQUIRE(raw.substr(0, header.size()) == header);
  float vals[4];
  std::memcpy(vals, raw.data() + header.size(), 16);
  REQUIRE(vals[0] == 3.0f);  // bottom row stored first
  REQUIRE(vals[1] == 4.0f);
  REQUIRE(vals[2] == 1.0f);
  REQUIRE(vals[3] == 2.0f);
}

TEST_CASE("pfm reader accepts big-endian payload", "[io]") {
  const fs::path p = tmp_dir() / "be.pfm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "Pf\n1 1\n1.0\n";
    float v = 7.5f;
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    bits = __builtin_bswap32(bits);
    out.write(reinterpret_cast<const char*>(&bits), 4);
  }
  const PfmImage img = read_pfm(p.string());
  REQUIRE(img.values[0] == 7.5f);
}

TEST_CASE("pfm error cases", "[io]") {
  REQUIRE_THROWS_AS(read_pfm((tmp_dir() / "nope.pfm").string()), MissingFile);

  const fs::path bad_magic = tmp_dir() / "bad_magic.pfm";
  std::ofstream(bad_magic) << "P6\n2 2\n-1.0\n";
  REQUIRE_THROWS_AS(read_pfm(bad_magic.string()), CorruptHeader);

  const fs::path color = tmp_dir() / "color.pfm";
  std::ofstream(color) << "PF\n2 2\n-1.0\n";
  REQUIRE_THROWS_AS(read_pfm(color.string()), CorruptHeader);

  const fs::path truncated = tmp_dir() / "trunc.pfm";
  std::ofstream(truncated) << "Pf\n4 4\n-1.0\nxx";
  REQUIRE_THROWS_AS(read_pfm(truncated.string()), CorruptHeader);
}

TEST_CASE("png gray round trip, 8 and 16 bit", "[io]") {
  std::mt19937 rng(103);
  for (int depth : {8, 16}) {
    GrayImage img;
    img.width = 13;
    img.height = 7;
    img.bit_depth = depth;
    img.values.resize(13 * 7);
    std::uniform_int_distribution<int> d(0, depth == 8 ? 255 : 65535);
    for (auto& v : img.values) v = static_cast<uint16_t>(d(rng));

    const fs::path p = tmp_dir() / ("gray" + std::to_string(depth) + ".png");
    write_png_gray(p.string(), img);
    const GrayImage back = read_png_gray(p.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.bit_depth == depth);
    REQUIRE(back.values == img.values);
  }
}

TEST_CASE("png error cases", "[io]") {
  REQUIRE_THROWS_AS(read_png_gray((tmp_dir() / "nope.png").string()),
                    MissingFile);
  const fs::path garbage = tmp_dir() / "garbage.png";
  std::ofstream(garbage) << "this is not a png";
  REQUIRE_THROWS_AS(read_png_gray(garbage.string()), CorruptHeader);
}

TEST_CASE("ply writer output parses with naive reader", "[io]") {
  std::mt19937 rng(107);
  std::uniform_real_distribution<float> d(-10.0f, 10.0f);
  std::uniform_int_distribution<int> ci(0, 255);
  std::vector<Eigen::Vector3f> pts;
  std::vector<Rgb> colors;
  for (int i = 0; i < 257; ++i) {
    pts.emplace_back(d(rng), d(rng), d(rng));
    colors.push_back({static_cast<uint8_t>(ci(rng)),
                      static_cast<uint8_t>(ci(rng)),
                      static_cast<uint8_t>(ci(rng))});
  }
  const fs::path p = tmp_dir() / "cloud.ply";
  write_ply(p.string(), pts, colors);

  const PlyContents back = parse_ply_naive(p);
  REQUIRE(back.points.size() == pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(back.points[i] == pts[i]);  // float32 in, float32 out
    REQUIRE(back.colors[i] == colors[i]);
  }

  colors.pop_back();
  REQUIRE_THROWS_AS(write_ply(p.string(), pts, colors), LengthMismatch);
}

TEST_CASE("tum round trip preserves poses", "[io]") {
  std::mt19937 rng(109);
  std::vector<Pose> poses;
  for (int i = 0; i < 25; ++i) poses.push_back(oracle::random_pose(rng, 2.5));

  const fs::path p = tmp_dir() / "traj.tum";
  save_tum(p.string(), poses);
  const std::vector<Pose> back = load_tum(p.string());
  REQUIRE(back.size() == poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    REQUIRE((back[i].trans - poses[i].trans).norm() < 1e-12);
    const Eigen::Matrix3d ra = poses[i].rotation();
    const Eigen::Matrix3d rb = back[i].rotation();
    REQUIRE((ra - rb).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tum file stores camera-to-world with frame-index timestamps",
          "[io]") {
  Pose pose;
  pose.rotvec = Eigen::Vector3d(0.3, -0.2, 0.5);
  pose.trans = Eigen::Vector3d(1.0, 2.0, 3.0);
  const fs::path p = tmp_dir() / "conv.tum";
  save_tum(p.string(), {Pose::identity(), pose});

  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  REQUIRE(line.rfind("#", 0) == 0);  // documented header comment

  std::getline(in, line);  // identity pose at timestamp 0
  std::istringstream l0(line);
  double ts, tx, ty, tz, qx, qy, qz, qw;
  l0 >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw;
  REQUIRE(ts == 0.0);
  REQUIRE(Eigen::Vector3d(tx, ty, tz).norm() == 0.0);
  REQUIRE(std::abs(qw) == 1.0);

  std::getline(in, line);
  std::istringstream l1(line);
  l1 >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw;
  REQUIRE(ts == 1.0);
  // translation column must be the camera center -R^T t, not t
  const Eigen::Vector3d center =
      -(pose.rotation().transpose() * pose.trans);
  REQUIRE((Eigen::Vector3d(tx, ty, tz) - center).norm() < 1e-15);
}

TEST_CASE("tum save is deterministic and reload-stable", "[io]") {
  std::mt19937 rng(113);
  std::vector<Pose> poses;
  for (int i = 0; i < 10; ++i) poses.push_back(oracle::random_pose(rng, 2.0));

  const fs::path p1 = tmp_dir() / "d1.tum";
  const fs::path p2 = tmp_dir() / "d2.tum";
  save_tum(p1.string(), poses);
  save_tum(p2.string(), poses);
  REQUIRE(read_all(p1) == read_all(p2));

  // a second generation must stay within far better than float32 precision
  const fs::path p3 = tmp_dir() / "d3.tum";
  save_tum(p3.string(), load_tum(p1.string()));
  const std::vector<Pose> gen2 = load_tum(p3.string());
  for (size_t i = 0; i < poses.size(); ++i) {
    REQUIRE((gen2[i].trans - poses[i].trans).norm() < 1e-12);
    REQUIRE((gen2[i].rotation() - poses[i].rotation()).cwiseAbs().maxCoeff() <
            1e-12);
  }
}

TEST_CASE("tum loader errors", "[io]") {
  REQUIRE_THROWS_AS(load_tum((tmp_dir() / "nope.tum").string()), MissingFile);
  const fs::path bad = tmp_dir() / "bad.tum";
  std::ofstream(bad) << "0.0 1 2\n";
  REQUIRE_THROWS_AS(load_tum(bad.string()), CorruptHeader);
}
