#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pir {

/// Content parameters of one toy image; shared across domains for a paired
/// index. shape_class indexes ToyShapeNames.
struct ToyContent {
  int64_t shape_class = 0;
  double cx = 0.0;        // center offset, fraction of half-extent
  double cy = 0.0;
  double scale = 0.5;     // fraction of half-resolution
  double rotation = 0.0;  // radians
  double hue = 0.0;       // used by the filled-color domain only
  double bg = 0.5;        // background phase
};

/// An immutable image collection with a written manifest. `origin_indices`
/// track the rows of the parent dataset a k-shot subset was drawn from.
struct FewShotDataset {
  torch::Tensor images;  // (N,3,R,R) float32 in [-1,1]
  std::string domain_name;
  std::vector<std::string> names;
  std::vector<uint64_t> hashes;              // fingerprint of each image tensor
  std::vector<int64_t> origin_indices;       // parent row per image
  std::vector<ToyContent> content;           // present for toy datasets
  int64_t resolution = 0;

  int64_t size() const { return images.defined() ? images.size(0) : 0; }
  torch::Tensor image(int64_t i) const { return images[i]; }

  /// Manifest document: header, then one row per image.
  std::string manifest() const;
};

/// Loads every decodable image under `dir` (sorted by filename),
/// center-crops, resizes to `resolution`, maps to [-1,1], and writes
/// `manifest.txt` into the directory. Undecodable files are skipped with a
/// warning; an empty or fully skipped directory raises NotFound.
FewShotDataset load_dataset(const std::string& dir, int64_t resolution);

/// Deterministic k-subset of `ds` as a function of (manifest order, seed);
/// selected rows keep ascending order so k = |ds| is the identity.
FewShotDataset select_k_shot(const FewShotDataset& ds, int64_t k, int64_t seed);

/// Writes a dataset to `dir` as PNG files plus manifest.txt.
void save_dataset(const FewShotDataset& ds, const std::string& dir);

/// Recipe for the procedural two-domain set: parametric shapes rendered
/// filled-and-colored on a dark textured background (source domain) versus
/// stroke-only on near-white (target domain). Content parameters are shared
/// across domains per index; only the style transform differs.
struct ToySpec {
  int64_t source_count = 2000;
  int64_t target_count = 1000;
  int64_t resolution = 64;
  int64_t seed = 7;
};

extern const std::vector<std::string> ToyShapeNames;  // circle, square, triangle, cross

struct ToyDomains {
  FewShotDataset source;
  FewShotDataset target;
};

ToyDomains generate_toy_domains(const ToySpec& spec);

/// Renders one toy image. `stroke_only` selects the target-domain style.
torch::Tensor render_toy_image(const ToyContent& content, bool stroke_only,
                               int64_t resolution);

}  // namespace pir
