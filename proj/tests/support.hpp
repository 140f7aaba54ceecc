#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "tigernet/box.hpp"
#include "tigernet/data_io.hpp"
#include "tigernet/postprocess.hpp"

namespace tigernet::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tigernet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::filesystem::path fixture_dir() { return TIGERNET_FIXTURE_DIR; }

inline Box random_box(std::mt19937_64& rng, double extent, double min_size = 0.5) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> size(min_size, extent / 2);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + size(rng), y + size(rng)};
}

// Boxes on a coarse lattice so that exact overlaps and ties are common.
inline Box lattice_box(std::mt19937_64& rng, int cells = 6) {
  std::uniform_int_distribution<int> c(0, cells - 1), s(1, 3);
  const double x = c(rng), y = c(rng);
  return {x, y, x + s(rng), y + s(rng)};
}

inline std::vector<Detection> random_detections(std::mt19937_64& rng, int n,
                                                const std::string& image_id = "img",
                                                bool lattice = true) {
  std::uniform_int_distribution<int> level(1, 10);
  std::vector<Detection> dets;
  for (int i = 0; i < n; ++i) {
    Detection d;
    d.image_id = image_id;
    d.box = lattice ? lattice_box(rng) : random_box(rng, 20.0);
    // Quantized scores so equal-score ties show up regularly.
    d.score = level(rng) / 10.0;
    dets.push_back(d);
  }
  return dets;
}

inline ImageRecord random_record(std::mt19937_64& rng, const std::string& id) {
  std::uniform_int_distribution<int> dim(1, 2000), count(0, 6), coin(0, 1), name_pick(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  static const char* names[] = {"tiger", "Tiger cub", "a&b <c>", "\"quoted\" 'x'", "unknown_42"};
  ImageRecord r;
  r.image_id = id;
  r.width = dim(rng);
  r.height = dim(rng);
  r.depth = coin(rng) ? 3 : 1;
  r.provenance = coin(rng) ? Provenance::Human : Provenance::Pseudo;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Annotation a;
    a.name = names[name_pick(rng)];
    double x0 = unit(rng) * r.width, x1 = unit(rng) * r.width;
    double y0 = unit(rng) * r.height, y1 = unit(rng) * r.height;
    // Some boxes stick out of the image and get clamped by sanitize.
    if (unit(rng) < 0.1) x1 = r.width * 1.5;
    if (unit(rng) < 0.1) y0 = -3.25;
    a.box = {std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
    a.difficult = unit(rng) < 0.2;
    if (r.provenance == Provenance::Pseudo) a.score = unit(rng);
    r.annotations.push_back(a);
  }
  sanitize(r);
  return r;
}

}  // namespace tigernet::test
