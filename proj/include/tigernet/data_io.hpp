#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tigernet/box.hpp"
#include "tigernet/model_graph.hpp"

namespace tigernet {

enum class Provenance { Human, Pseudo };
const char* to_string(Provenance p);

struct Annotation {
  std::string name;
  Box box;
  bool difficult = false;
  // Teacher confidence; only pseudo labels carry one.
  std::optional<double> score;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  int depth = 3;
  std::vector<Annotation> annotations;
  Provenance provenance = Provenance::Human;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

// VOC files store 1-based inclusive pixel indices. Internally boxes are
// continuous and 0-based: x_min = xmin - 1, x_max = xmax (same for y).

/// Shift a continuous coordinate to the VOC 1-based minimum and back.
/// Sanitized minima are fixed points of this map, so they survive any
/// number of serialize/parse cycles unchanged.
double representable_min(double v);

/// Clamp boxes into [0, width] x [0, height] and snap minima onto values
/// VOC text can carry exactly. Returns the number of clamped boxes.
int sanitize(ImageRecord& record);

struct VocParseResult {
  std::vector<ImageRecord> records;
  int clamped_boxes = 0;
};

/// Parse one annotation document. Unknown elements are ignored; the
/// optional `difficult`, per-object `score`, and top-level `provenance`
/// elements default to 0, absent, and human.
ImageRecord parse_voc_string(const std::string& xml, const std::string& image_id,
                             int* clamped = nullptr);
ImageRecord parse_voc_file(const std::filesystem::path& path, int* clamped = nullptr);

/// Every *.xml file in the directory, sorted by file name. The image id is
/// the file stem.
VocParseResult parse_voc(const std::filesystem::path& xml_dir);

std::string serialize_voc_string(const ImageRecord& record);

/// Writes `<image_id>.xml` per record, creating the directory if needed.
void serialize_voc(std::span<const ImageRecord> records, const std::filesystem::path& xml_dir);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct ImageSize {
  std::string image_id;
  int width = 0;
  int height = 0;
};

/// CSV with header `image_id,width,height`.
std::vector<ImageSize> read_sizes_csv(std::istream& is);
std::vector<ImageSize> load_sizes_csv(const std::string& path);
void write_sizes_csv(std::ostream& os, std::span<const ImageRecord> records);

struct DatasetSplit {
  std::vector<ImageRecord> train;
  std::vector<ImageRecord> val;
};

/// Image-level random partition. The train side gets round(fraction * n)
/// images (at least one, leaving at least one for validation); both sides
/// keep the input order.
DatasetSplit split_dataset(std::span<const ImageRecord> records, double train_fraction,
                           std::uint64_t seed);

struct DatasetStats {
  int images = 0;
  int boxes = 0;
  int difficult = 0;
  int empty_images = 0;
  std::map<std::pair<int, int>, int> resolutions;  // (width, height) -> images
  std::map<std::string, int> classes;
};

DatasetStats dataset_stats(std::span<const ImageRecord> records);
void write_stats_csv(std::ostream& os, const DatasetStats& stats);

}  // namespace tigernet
