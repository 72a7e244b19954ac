#pragma once

// Procedural visual-search scenes: a vector description of a large virtual
// canvas holding small bordered glyphs, one of which is the target of a
// verifiable question. Pixels are produced on demand by render(), so any
// window can be re-rasterized at any resolution.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zoomrl/geometry.hpp"

namespace zoomrl {

enum class Difficulty { kEasy, kMedium, kHard };
enum class GlyphColor { kRed, kGreen, kBlue, kYellow };
enum class GlyphShape { kCircle, kSquare, kTriangle };

inline constexpr int kNumColors = 4;
inline constexpr int kNumShapes = 3;
inline constexpr int kNumDigits = 10;

std::string_view to_string(Difficulty d);
std::string_view to_string(GlyphColor c);
std::string_view to_string(GlyphShape s);
Difficulty parse_difficulty(std::string_view text);  // throws Error{kBadConfig}

inline constexpr std::array<Difficulty, 3> kAllDifficulties{
    Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard};

struct Cell {
  BBox region;     // bordered cell box, relative to the canvas
  BBox glyph_box;  // drawn footprint of the glyph, inside region
  GlyphColor color = GlyphColor::kRed;
  GlyphShape shape = GlyphShape::kCircle;
  int digit = 0;
  bool is_target = false;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// The visual cue a question uses to single out its target.
struct Cue {
  GlyphColor color = GlyphColor::kRed;
  GlyphShape shape = GlyphShape::kCircle;

  bool matches(const Cell& c) const { return c.color == color && c.shape == shape; }
  friend bool operator==(const Cue&, const Cue&) = default;
};

struct Scene {
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::kHard;
  int canvas_size = 4096;
  std::vector<Cell> cells;
  std::size_t target_cell = 0;
  int distractor_count = 0;  // same-colour, different-shape cells

  const Cell& target() const { return cells.at(target_cell); }
  Cue cue() const { return Cue{target().color, target().shape}; }

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct QAPair {
  std::string question;
  std::string answer;
  BBox target_region;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct OriginalProvenance {
  friend bool operator==(const OriginalProvenance&, const OriginalProvenance&) = default;
};
struct CropProvenance {
  int source_index = 1;  // 1-based index of the image this was cropped from
  BBox bbox_in_source;
  friend bool operator==(const CropProvenance&, const CropProvenance&) = default;
};
using Provenance = std::variant<OriginalProvenance, CropProvenance>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB; empty when not rasterized
  Provenance provenance = OriginalProvenance{};
  BBox window = kFullFrame;  // rendered window, relative to the canvas

  bool has_pixels() const { return !pixels.empty(); }
  bool is_original() const { return std::holds_alternative<OriginalProvenance>(provenance); }
};

struct SynthConfig {
  int canvas_size = 4096;
  int base_resolution = 448;
  double legible_px = 12.0;       // glyph box side needed to read the digit
  double shape_px = 6.0;          // side needed to tell the border shape
  double color_px = 2.0;          // side needed to see the colour at all
  double min_box_area = 1e-6;
  int min_render_px = 16;
  double max_glyph_fraction = 0.05;
  double cell_margin = 0.25;      // region = glyph box grown by this fraction per side
};

/// Deterministic scene generator. Hard scenes need at least two nested
/// anchor zooms before the target is legible at the base resolution.
Scene generate_scene(std::uint64_t seed, Difficulty difficulty, const SynthConfig& cfg = {});

QAPair make_qa(const Scene& scene);

/// Recovers the cue from a question produced by make_qa().
std::optional<Cue> parse_cue(std::string_view question);

/// Rasterizes `window` (relative to the canvas) at out_w x out_h.
/// Throws Error{kDegenerateBox} for tiny windows or outputs below 16 px.
Image render(const Scene& scene, const BBox& window, int out_w, int out_h,
             const SynthConfig& cfg = {});

/// Renders `bbox` given relative to an already rendered image. The result is
/// identical to rendering compose(parent.window, bbox) directly.
Image render_crop(const Scene& scene, const Image& parent, int parent_index, const BBox& bbox,
                  int out_w, int out_h, const SynthConfig& cfg = {});

/// trim + casefold + collapse internal whitespace.
std::string normalize_answer(std::string_view text);

bool verify_answer(const Scene& scene, const QAPair& qa, std::string_view answer_text);

/// How well a glyph can be perceived inside a window rendered square at out_px.
enum class Perception { kNone, kColor, kShape, kLegible };

/// Side lengths, in output pixels, of the part of `glyph_box` visible
/// inside `window`. Zero when they do not intersect.
struct Footprint {
  double width_px = 0.0;
  double height_px = 0.0;
};
Footprint glyph_footprint(const BBox& glyph_box, const BBox& window, int out_px);

Perception perceive(const Cell& cell, const BBox& window, int out_px, const SynthConfig& cfg = {});

/// True iff the target glyph's footprint inside `window` is at least
/// legible_px on both sides. Pure geometry; no pixels are inspected.
bool legibility_oracle(const Scene& scene, const BBox& window, int out_w,
                       const SynthConfig& cfg = {});

/// Zoom anchors available at every view, relative to that view.
const std::vector<BBox>& zoom_anchors();

/// Smallest number of nested anchor zooms after which the target is legible
/// at the base resolution, following the best-overlap anchor at each level.
/// Returns -1 if no chain of up to `max_depth` zooms reaches legibility.
int required_zoom_depth(const Scene& scene, int max_depth = 4, const SynthConfig& cfg = {});

/// Best anchor (index into zoom_anchors()) for moving toward `target`
/// inside `view`: largest covered fraction of the target, then smallest
/// anchor, then closest centre.
std::size_t best_anchor_toward(const BBox& view, const BBox& target);

/// One line of a dataset file. Images are never stored; they are re-rendered
/// from (seed, difficulty).
struct DatasetRecord {
  std::uint64_t seed = 0;
  Difficulty difficulty = Difficulty::kHard;
  QAPair qa;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

std::string to_jsonl(const DatasetRecord& rec);
DatasetRecord dataset_record_from_json(std::string_view line);

}  // namespace zoomrl
