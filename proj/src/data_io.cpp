#include "tigernet/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace tigernet {

const char* to_string(Provenance p) { return p == Provenance::Human ? "human" : "pseudo"; }

double representable_min(double v) { return (v + 1.0) - 1.0; }

int sanitize(ImageRecord& record) {
  int clamped = 0;
  const double w = record.width, h = record.height;
  for (auto& a : record.annotations) {
    const Box before = a.box;
    a.box = clip(a.box, w, h);
    if (!(a.box == before)) ++clamped;
    a.box.x_min = representable_min(a.box.x_min);
    a.box.y_min = representable_min(a.box.y_min);
    a.box.x_max = std::max(a.box.x_max, a.box.x_min);
    a.box.y_max = std::max(a.box.y_max, a.box.y_min);
  }
  return clamped;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
    throw ParseError(what + ": '" + t + "' is not a finite number");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size()) return v;
  // Some tools write sizes as "1920.0".
  const double d = parse_number(t, what);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ParseError(what + ": '" + t + "' is not an integer");
  return int(d);
}

bool parse_flag(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "0" || t == "false") return false;
  if (t == "1" || t == "true") return true;
  throw ParseError(what + ": expected 0 or 1, got '" + t + "'");
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

ImageRecord parse_tree(const pt::ptree& doc, const std::string& image_id, int* clamped) {
  const auto root = doc.get_child_optional("annotation");
  if (!root) throw ParseError("missing <annotation> root");

  ImageRecord r;
  r.image_id = image_id;
  const auto size = root->get_child_optional("size");
  if (!size) throw ParseError("missing <size> element");
  const auto width = size->get_optional<std::string>("width");
  const auto height = size->get_optional<std::string>("height");
  if (!width || !height) throw ParseError("<size> needs <width> and <height>");
  r.width = parse_int(*width, "size/width");
  r.height = parse_int(*height, "size/height");
  if (r.width <= 0 || r.height <= 0) throw ParseError("image size must be positive");
  if (const auto depth = size->get_optional<std::string>("depth"))
    r.depth = parse_int(*depth, "size/depth");
  if (const auto prov = root->get_optional<std::string>("provenance")) {
    const std::string p = trim(*prov);
    if (p == "human") r.provenance = Provenance::Human;
    else if (p == "pseudo") r.provenance = Provenance::Pseudo;
    else throw ParseError("unknown provenance '" + p + "'");
  }

  int index = 0;
  for (const auto& [tag, obj] : *root) {
    if (tag != "object") continue;
    const std::string where = "object " + std::to_string(index);
    Annotation a;
    const auto name = obj.get_optional<std::string>("name");
    if (!name) throw ParseError(where + ": missing <name>");
    a.name = trim(*name);
    const auto bb = obj.get_child_optional("bndbox");
    if (!bb) throw ParseError(where + ": missing <bndbox>");
    auto coord = [&](const char* key) {
      const auto v = bb->get_optional<std::string>(key);
      if (!v) throw ParseError(where + ": missing bndbox/" + key);
      return parse_number(*v, where + " bndbox/" + key);
    };
    const double xmin = coord("xmin"), ymin = coord("ymin");
    const double xmax = coord("xmax"), ymax = coord("ymax");
    a.box = {xmin - 1.0, ymin - 1.0, xmax, ymax};
    if (a.box.x_min > a.box.x_max || a.box.y_min > a.box.y_max)
      throw ParseError(where + ": inverted box (min greater than max)");
    if (const auto d = obj.get_optional<std::string>("difficult"))
      a.difficult = parse_flag(*d, where + " difficult");
    if (const auto s = obj.get_optional<std::string>("score"))
      a.score = parse_number(*s, where + " score");
    r.annotations.push_back(std::move(a));
    ++index;
  }
  const int n = sanitize(r);
  if (clamped) *clamped += n;
  return r;
}

}  // namespace

ImageRecord parse_voc_string(const std::string& xml, const std::string& image_id, int* clamped) {
  pt::ptree doc;
  try {
    std::istringstream is(xml);
    pt::read_xml(is, doc);
    return parse_tree(doc, image_id, clamped);
  } catch (const pt::ptree_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }
}

ImageRecord parse_voc_file(const fs::path& path, int* clamped) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_voc_string(ss.str(), path.stem().string(), clamped);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

VocParseResult parse_voc(const fs::path& xml_dir) {
  if (!fs::is_directory(xml_dir))
    throw ParseError("annotation directory '" + xml_dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(xml_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  VocParseResult out;
  for (const auto& f : files) out.records.push_back(parse_voc_file(f, &out.clamped_boxes));
  return out;
}

std::string serialize_voc_string(const ImageRecord& r) {
  std::ostringstream os;
  os << "<annotation>\n"
     << "\t<folder>images</folder>\n"
     << "\t<filename>" << escape_xml(r.image_id) << ".jpg</filename>\n"
     << "\t<size>\n"
     << "\t\t<width>" << r.width << "</width>\n"
     << "\t\t<height>" << r.height << "</height>\n"
     << "\t\t<depth>" << r.depth << "</depth>\n"
     << "\t</size>\n"
     << "\t<segmented>0</segmented>\n";
  if (r.provenance == Provenance::Pseudo) os << "\t<provenance>pseudo</provenance>\n";
  for (const auto& a : r.annotations) {
    os << "\t<object>\n"
       << "\t\t<name>" << escape_xml(a.name) << "</name>\n"
       << "\t\t<pose>Unspecified</pose>\n"
       << "\t\t<truncated>0</truncated>\n"
       << "\t\t<difficult>" << (a.difficult ? 1 : 0) << "</difficult>\n";
    if (a.score) os << "\t\t<score>" << format_double(*a.score) << "</score>\n";
    os << "\t\t<bndbox>\n"
       << "\t\t\t<xmin>" << format_double(a.box.x_min + 1.0) << "</xmin>\n"
       << "\t\t\t<ymin>" << format_double(a.box.y_min + 1.0) << "</ymin>\n"
       << "\t\t\t<xmax>" << format_double(a.box.x_max) << "</xmax>\n"
       << "\t\t\t<ymax>" << format_double(a.box.y_max) << "</ymax>\n"
       << "\t\t</bndbox>\n"
       << "\t</object>\n";
  }
  os << "</annotation>\n";
  return os.str();
}

void serialize_voc(std::span<const ImageRecord> records, const fs::path& xml_dir) {
  std::error_code ec;
  fs::create_directories(xml_dir, ec);
  if (ec) throw Error("cannot create '" + xml_dir.string() + "': " + ec.message());
  for (const auto& r : records) {
    if (r.image_id.empty() || r.image_id.find_first_of("/\\") != std::string::npos ||
        r.image_id == "." || r.image_id == "..")
      throw Error("image id '" + r.image_id + "' cannot be used as a file name");
    const fs::path path = xml_dir / (r.image_id + ".xml");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << serialize_voc_string(r);
    if (!f) throw Error("failed writing '" + path.string() + "'");
  }
}

std::vector<ImageSize> read_sizes_csv(std::istream& is) {
  std::vector<ImageSize> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("image_id", 0) == 0) continue;
    std::istringstream row(line);
    ImageSize s;
    std::string w, h;
    if (!std::getline(row, s.image_id, ',') || !std::getline(row, w, ',') || !std::getline(row, h))
      throw ParseError("sizes line " + std::to_string(line_no) + ": expected image_id,width,height");
    s.width = parse_int(w, "sizes line " + std::to_string(line_no));
    s.height = parse_int(h, "sizes line " + std::to_string(line_no));
    if (s.width <= 0 || s.height <= 0)
      throw ParseError("sizes line " + std::to_string(line_no) + ": size must be positive");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ImageSize> load_sizes_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open sizes file '" + path + "'");
  return read_sizes_csv(f);
}

void write_sizes_csv(std::ostream& os, std::span<const ImageRecord> records) {
  os << "image_id,width,height\n";
  for (const auto& r : records) os << r.image_id << ',' << r.width << ',' << r.height << '\n';
}

DatasetSplit split_dataset(std::span<const ImageRecord> records, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1))
    throw Error("split: train fraction must lie strictly between 0 and 1");
  if (records.size() < 2) throw Error("split: need at least two records");
  const std::size_t n = records.size();
  const auto n_train = std::clamp<std::size_t>(std::size_t(std::llround(train_fraction * double(n))),
                                               1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) is_train[order[k]] = true;

  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) (is_train[i] ? split.train : split.val).push_back(records[i]);
  return split;
}

DatasetStats dataset_stats(std::span<const ImageRecord> records) {
  DatasetStats s;
  for (const auto& r : records) {
    ++s.images;
    s.boxes += int(r.annotations.size());
    if (r.annotations.empty()) ++s.empty_images;
    ++s.resolutions[{r.width, r.height}];
    for (const auto& a : r.annotations) {
      if (a.difficult) ++s.difficult;
      ++s.classes[a.name];
    }
  }
  return s;
}

void write_stats_csv(std::ostream& os, const DatasetStats& s) {
  os << "key,value\n"
     << "images," << s.images << '\n'
     << "boxes," << s.boxes << '\n'
     << "difficult," << s.difficult << '\n'
     << "empty_images," << s.empty_images << '\n';
  for (const auto& [res, count] : s.resolutions)
    os << "resolution:" << res.first << 'x' << res.second << ',' << count << '\n';
  for (const auto& [name, count] : s.classes) os << "class:" << name << ',' << count << '\n';
}

}  // namespace tigernet
