#include "pir/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "pir/error.hpp"
#include "pir/fingerprint.hpp"
#include "pir/image_io.hpp"

namespace fs = std::filesystem;

namespace pir {

const std::vector<std::string> ToyShapeNames = {"circle", "square", "triangle", "cross"};

namespace {

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Vec2 {
  double x, y;
};

double shape_sdf(int64_t shape_class, Vec2 q) {
  switch (shape_class) {
    case 0:  // circle
      return std::sqrt(q.x * q.x + q.y * q.y) - 1.0;
    case 1:  // square
      return std::max(std::abs(q.x), std::abs(q.y)) - 1.0;
    case 2: {  // equilateral triangle, apex up, circumradius 1
      const double c30 = std::sqrt(3.0) / 2.0;
      double d = q.x * 0.0 + q.y * -1.0;
      d = std::max(d, q.x * c30 + q.y * 0.5);
      d = std::max(d, q.x * -c30 + q.y * 0.5);
      return d - 0.5;
    }
    case 3: {  // cross: union of two bars
      auto bar = [](Vec2 p, double bx, double by) {
        return std::max(std::abs(p.x) - bx, std::abs(p.y) - by);
      };
      return std::min(bar(q, 1.0, 0.38), bar(q, 0.38, 1.0));
    }
    default:
      throw InvalidArgument("unknown toy shape class " + std::to_string(shape_class));
  }
}

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  const double c = v * s;
  const double hp = std::fmod(h, 1.0) * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  rgb[0] = r + m;
  rgb[1] = g + m;
  rgb[2] = b + m;
}

double smooth_coverage(double sdf_px, double aa = 1.0) {
  return std::clamp(0.5 - sdf_px / aa, 0.0, 1.0);
}

std::vector<std::string> list_image_files(const std::string& dir) {
  static const std::vector<std::string> exts = {".png", ".jpg", ".jpeg", ".bmp"};
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

torch::Tensor render_toy_image(const ToyContent& content, bool stroke_only,
                               int64_t resolution) {
  const int64_t r = resolution;
  auto img = torch::empty({3, r, r}, torch::kFloat32);
  auto acc = img.accessor<float, 3>();

  const double half = static_cast<double>(r) / 2.0;
  const double cosr = std::cos(content.rotation);
  const double sinr = std::sin(content.rotation);
  const double scale_px = content.scale * half;

  double fill[3];
  hsv_to_rgb(content.hue, 0.75, 0.95, fill);

  for (int64_t py = 0; py < r; ++py) {
    for (int64_t px = 0; px < r; ++px) {
      // pixel center in normalized [-1,1] coordinates
      const double nx = (static_cast<double>(px) + 0.5 - half) / half;
      const double ny = (static_cast<double>(py) + 0.5 - half) / half;
      const double dx = (nx - content.cx) / content.scale;
      const double dy = (ny - content.cy) / content.scale;
      const Vec2 q{cosr * dx + sinr * dy, -sinr * dx + cosr * dy};
      const double sdf_px = shape_sdf(content.shape_class, q) * scale_px;

      double out[3];
      if (stroke_only) {
        const double bg = 0.91 + 0.06 * (content.bg - 0.5);
        const double cov = smooth_coverage(std::abs(sdf_px) - 0.8);
        const double v = bg + (0.06 - bg) * cov;
        out[0] = out[1] = out[2] = v;
      } else {
        const double base = 0.10 + 0.12 * content.bg + 0.05 * (ny + 1.0) / 2.0;
        const double tex =
            0.03 * std::sin((nx + ny) * 4.0 + content.bg * 2.0 * std::numbers::pi);
        const double cov = smooth_coverage(sdf_px);
        for (int c = 0; c < 3; ++c) {
          const double bg = std::clamp(base + tex, 0.0, 1.0);
          out[c] = bg + (fill[c] - bg) * cov;
        }
      }
      for (int c = 0; c < 3; ++c) {
        acc[c][py][px] = static_cast<float>(out[c] * 2.0 - 1.0);
      }
    }
  }
  return img;
}

std::string FewShotDataset::manifest() const {
  std::ostringstream os;
  os << "# pir-manifest v1 domain=" << domain_name << " resolution=" << resolution
     << " count=" << size() << "\n";
  const bool toy = !content.empty();
  os << "# columns: index name hash origin" << (toy ? " shape cx cy scale rotation hue bg" : "")
     << "\n";
  os.precision(12);
  for (int64_t i = 0; i < size(); ++i) {
    os << i << " " << names[i] << " " << hash_hex(hashes[i]) << " "
       << (origin_indices.empty() ? i : origin_indices[i]);
    if (toy) {
      const auto& c = content[i];
      os << " " << ToyShapeNames[c.shape_class] << " " << c.cx << " " << c.cy << " " << c.scale
         << " " << c.rotation << " " << c.hue << " " << c.bg;
    }
    os << "\n";
  }
  return os.str();
}

ToyDomains generate_toy_domains(const ToySpec& spec) {
  if (spec.source_count < 1 || spec.target_count < 1) {
    throw InvalidArgument("generate_toy_domains: counts must be >= 1");
  }
  if (spec.target_count > spec.source_count) {
    throw InvalidArgument("generate_toy_domains: target_count must not exceed source_count");
  }
  std::mt19937_64 rng(static_cast<uint64_t>(spec.seed));
  std::uniform_int_distribution<int64_t> shape_dist(0, 3);
  std::uniform_real_distribution<double> center_dist(-0.30, 0.30);
  std::uniform_real_distribution<double> scale_dist(0.40, 0.70);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit_dist(0.0, 1.0);

  std::vector<ToyContent> contents(spec.source_count);
  for (auto& c : contents) {
    c.shape_class = shape_dist(rng);
    c.cx = center_dist(rng);
    c.cy = center_dist(rng);
    c.scale = scale_dist(rng);
    c.rotation = angle_dist(rng);
    c.hue = unit_dist(rng);
    c.bg = unit_dist(rng);
  }

  auto build = [&](bool stroke_only, int64_t count, const std::string& name) {
    FewShotDataset ds;
    ds.domain_name = name;
    ds.resolution = spec.resolution;
    auto images = torch::empty({count, 3, spec.resolution, spec.resolution});
    for (int64_t i = 0; i < count; ++i) {
      images[i] = render_toy_image(contents[i], stroke_only, spec.resolution);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "img_%05lld.png", static_cast<long long>(i));
      ds.names.push_back(buf);
      ds.origin_indices.push_back(i);
      ds.content.push_back(contents[i]);
    }
    ds.images = images;
    for (int64_t i = 0; i < count; ++i) {
      ds.hashes.push_back(tensor_fingerprint(images[i]));
    }
    return ds;
  };

  // Paired by construction: target image i reuses source image i's content.
  return {build(false, spec.source_count, "toy_source"),
          build(true, spec.target_count, "toy_target")};
}

FewShotDataset load_dataset(const std::string& dir, int64_t resolution) {
  if (!fs::is_directory(dir)) {
    throw NotFound("load_dataset: no such directory " + dir);
  }
  auto files = list_image_files(dir);
  if (files.empty()) {
    throw NotFound("load_dataset: no image files in " + dir);
  }
  FewShotDataset ds;
  ds.domain_name = fs::path(dir).filename().string();
  ds.resolution = resolution;
  std::vector<torch::Tensor> images;
  for (const auto& file : files) {
    torch::Tensor img;
    try {
      img = center_crop_resize(load_image(file), resolution);
    } catch (const Error& e) {
      std::cerr << "warning: skipping undecodable file " << file << "\n";
      continue;
    }
    images.push_back(img);
    ds.names.push_back(fs::path(file).filename().string());
  }
  if (images.empty()) {
    throw NotFound("load_dataset: every file in " + dir + " failed to decode");
  }
  ds.images = torch::stack(images);
  for (int64_t i = 0; i < ds.size(); ++i) {
    ds.hashes.push_back(tensor_fingerprint(ds.images[i]));
    ds.origin_indices.push_back(i);
  }
  std::ofstream out(fs::path(dir) / "manifest.txt");
  out << ds.manifest();
  return ds;
}

FewShotDataset select_k_shot(const FewShotDataset& ds, int64_t k, int64_t seed) {
  if (k < 1 || k > ds.size()) {
    throw InvalidArgument("select_k_shot: k must be in [1, " + std::to_string(ds.size()) +
                          "], got " + std::to_string(k));
  }
  std::vector<int64_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(static_cast<uint64_t>(seed));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(k);
  std::sort(order.begin(), order.end());

  FewShotDataset out;
  out.domain_name = ds.domain_name + "_k" + std::to_string(k);
  out.resolution = ds.resolution;
  auto idx = torch::from_blob(order.data(), {k}, torch::kInt64).clone();
  out.images = ds.images.index_select(0, idx).contiguous();
  for (int64_t i : order) {
    out.names.push_back(ds.names[i]);
    out.hashes.push_back(ds.hashes[i]);
    out.origin_indices.push_back(ds.origin_indices.empty() ? i : ds.origin_indices[i]);
    if (!ds.content.empty()) {
      out.content.push_back(ds.content[i]);
    }
  }
  return out;
}

void save_dataset(const FewShotDataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  for (int64_t i = 0; i < ds.size(); ++i) {
    save_image(ds.images[i], (fs::path(dir) / ds.names[i]).string());
  }
  std::ofstream out(fs::path(dir) / "manifest.txt");
  if (!out) {
    throw NotFound("save_dataset: cannot write manifest under " + dir);
  }
  out << ds.manifest();
}

}  // namespace pir
