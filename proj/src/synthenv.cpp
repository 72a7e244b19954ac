#include "zoomrl/synthenv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "json.hpp"

#include "zoomrl/error.hpp"
#include "zoomrl/rng.hpp"

namespace zoomrl {

namespace {

struct DifficultyProfile {
  int glyph_min_px;
  int glyph_max_px;
  int cells_min;
  int cells_max;
  int decoys;
  int min_depth;  // required_zoom_depth must be >= min_depth
  int max_depth;  // ... and <= max_depth
};

// Glyph sizes are in canvas pixels. With the default 4096 canvas and 448 px
// renders, a glyph of side g covers g*448/4096 output pixels at full frame:
//   hard   28..36 px -> 3..4 px (colour only); one anchor zoom stays < 12 px
//   medium 56..100 px -> shape visible; one 0.5 zoom is legible
//   easy   120..160 px -> legible at full frame
DifficultyProfile profile_for(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return {120, 160, 8, 12, 1, 0, 0};
    case Difficulty::kMedium:
      return {56, 100, 10, 16, 2, 1, 1};
    case Difficulty::kHard:
      return {28, 36, 14, 22, 2, 2, 4};
  }
  return {28, 36, 14, 22, 2, 2, 4};
}

constexpr double kCandidateSeparation = 0.3;  // Chebyshev, between cue-coloured cells
constexpr double kRegionGap = 0.004;

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr Rgb kBackground{238, 238, 232};
constexpr Rgb kPanel{214, 214, 206};
constexpr Rgb kInterior{252, 252, 250};
constexpr Rgb kInk{20, 20, 20};

Rgb color_rgb(GlyphColor c) {
  switch (c) {
    case GlyphColor::kRed:
      return {214, 38, 38};
    case GlyphColor::kGreen:
      return {36, 160, 64};
    case GlyphColor::kBlue:
      return {40, 76, 214};
    case GlyphColor::kYellow:
      return {226, 196, 24};
  }
  return {0, 0, 0};
}

// 5x7 digit bitmaps, one row per byte, MSB of the low 5 bits is the left column.
constexpr std::uint8_t kDigitFont[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};

bool digit_ink(int digit, double u, double v, double u0, double u1, double v0, double v1) {
  if (u < u0 || u >= u1 || v < v0 || v >= v1) return false;
  const int col = std::min(4, static_cast<int>((u - u0) / (u1 - u0) * 5.0));
  const int row = std::min(6, static_cast<int>((v - v0) / (v1 - v0) * 7.0));
  return (kDigitFont[digit][row] >> (4 - col)) & 1;
}

// Colour of canvas point (x, y) inside cell `c`; (x, y) is inside c.region.
Rgb shade_cell(const Cell& c, double x, double y) {
  const BBox& g = c.glyph_box;
  if (x < g.x1 || x >= g.x2 || y < g.y1 || y >= g.y2) return kPanel;
  const double u = (x - g.x1) / g.width();
  const double v = (y - g.y1) / g.height();
  constexpr double kStroke = 0.12;
  switch (c.shape) {
    case GlyphShape::kCircle: {
      const double d = std::hypot(u - 0.5, v - 0.5);
      if (d > 0.5) return kPanel;
      if (d >= 0.5 - kStroke) return color_rgb(c.color);
      return digit_ink(c.digit, u, v, 0.34, 0.66, 0.28, 0.72) ? kInk : kInterior;
    }
    case GlyphShape::kSquare: {
      if (std::min({u, 1.0 - u, v, 1.0 - v}) < kStroke) return color_rgb(c.color);
      return digit_ink(c.digit, u, v, 0.32, 0.68, 0.26, 0.74) ? kInk : kInterior;
    }
    case GlyphShape::kTriangle: {
      const double slack = v * 0.5 - std::abs(u - 0.5);
      if (slack < 0.0) return kPanel;
      if (slack / std::sqrt(1.25) < kStroke * 0.8 || v > 1.0 - kStroke) return color_rgb(c.color);
      return digit_ink(c.digit, u, v, 0.4, 0.6, 0.5, 0.84) ? kInk : kInterior;
    }
  }
  return kPanel;
}

double chebyshev(const BBox& a, const BBox& b) {
  return std::max(std::abs(a.center_x() - b.center_x()), std::abs(a.center_y() - b.center_y()));
}

bool regions_clash(const BBox& a, const BBox& b) {
  return a.x1 < b.x2 + kRegionGap && b.x1 < a.x2 + kRegionGap && a.y1 < b.y2 + kRegionGap &&
         b.y1 < a.y2 + kRegionGap;
}

// One attempt at laying out a scene; empty result on placement failure.
std::optional<std::vector<Cell>> try_layout(Engine& eng, const DifficultyProfile& prof,
                                            const SynthConfig& cfg, Cue cue) {
  const int n_cells = static_cast<int>(uniform_int(eng, prof.cells_min, prof.cells_max));
  const double canvas = cfg.canvas_size;
  const int max_glyph = std::min(
      prof.glyph_max_px, static_cast<int>(std::floor(cfg.max_glyph_fraction * canvas)));

  std::vector<Cell> cells;
  cells.reserve(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    Cell cell;
    const bool is_target = i == 0;
    const bool is_decoy = i >= 1 && i <= prof.decoys;
    cell.is_target = is_target;
    cell.digit = static_cast<int>(uniform_int(eng, 0, kNumDigits - 1));
    if (is_target) {
      cell.color = cue.color;
      cell.shape = cue.shape;
    } else if (is_decoy) {
      cell.color = cue.color;
      const int offset = static_cast<int>(uniform_int(eng, 1, kNumShapes - 1));
      cell.shape = static_cast<GlyphShape>((static_cast<int>(cue.shape) + offset) % kNumShapes);
    } else {
      const int offset = static_cast<int>(uniform_int(eng, 1, kNumColors - 1));
      cell.color = static_cast<GlyphColor>((static_cast<int>(cue.color) + offset) % kNumColors);
      cell.shape = static_cast<GlyphShape>(uniform_int(eng, 0, kNumShapes - 1));
    }

    const int glyph = static_cast<int>(uniform_int(eng, prof.glyph_min_px, max_glyph));
    const int margin = static_cast<int>(std::lround(glyph * cfg.cell_margin));
    const int side = glyph + 2 * margin;
    bool placed = false;
    for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
      const int x0 = static_cast<int>(uniform_int(eng, 0, cfg.canvas_size - side));
      const int y0 = static_cast<int>(uniform_int(eng, 0, cfg.canvas_size - side));
      const BBox region{x0 / canvas, y0 / canvas, (x0 + side) / canvas, (y0 + side) / canvas};
      bool ok = true;
      for (const Cell& other : cells) {
        if (regions_clash(region, other.region)) {
          ok = false;
          break;
        }
        const bool both_candidates = (is_target || is_decoy) && other.color == cue.color;
        if (both_candidates && chebyshev(region, other.region) < kCandidateSeparation) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      cell.region = region;
      cell.glyph_box = BBox{(x0 + margin) / canvas, (y0 + margin) / canvas,
                            (x0 + margin + glyph) / canvas, (y0 + margin + glyph) / canvas};
      placed = true;
    }
    if (!placed) return std::nullopt;
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy:
      return "easy";
    case Difficulty::kMedium:
      return "medium";
    case Difficulty::kHard:
      return "hard";
  }
  return "hard";
}

std::string_view to_string(GlyphColor c) {
  switch (c) {
    case GlyphColor::kRed:
      return "red";
    case GlyphColor::kGreen:
      return "green";
    case GlyphColor::kBlue:
      return "blue";
    case GlyphColor::kYellow:
      return "yellow";
  }
  return "red";
}

std::string_view to_string(GlyphShape s) {
  switch (s) {
    case GlyphShape::kCircle:
      return "circle";
    case GlyphShape::kSquare:
      return "square";
    case GlyphShape::kTriangle:
      return "triangle";
  }
  return "circle";
}

Difficulty parse_difficulty(std::string_view text) {
  for (Difficulty d : kAllDifficulties) {
    if (to_string(d) == text) return d;
  }
  throw Error(ErrorCode::kBadConfig, "unknown difficulty '" + std::string(text) + "'");
}

const std::vector<BBox>& zoom_anchors() {
  static const std::vector<BBox> anchors = [] {
    std::vector<BBox> out;
    for (double oy : {0.0, 0.25, 0.5}) {
      for (double ox : {0.0, 0.25, 0.5}) out.push_back(BBox{ox, oy, ox + 0.5, oy + 0.5});
    }
    for (double oy : {0.165, 0.495}) {
      for (double ox : {0.165, 0.495}) out.push_back(BBox{ox, oy, ox + 0.34, oy + 0.34});
    }
    return out;
  }();
  return anchors;
}

std::size_t best_anchor_toward(const BBox& view, const BBox& target) {
  const auto& anchors = zoom_anchors();
  std::size_t best = 0;
  double best_cover = -1.0, best_area = 0.0, best_dist = 0.0;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const BBox abs = compose(view, anchors[k]);
    const double cover = intersection_area(abs, target) / target.area();
    const double area = abs.area();
    const double dist = std::hypot(abs.center_x() - target.center_x(),
                                   abs.center_y() - target.center_y());
    constexpr double kTol = 1e-12;
    bool better = false;
    if (cover > best_cover + kTol) {
      better = true;
    } else if (cover > best_cover - kTol) {
      if (area < best_area - kTol) {
        better = true;
      } else if (area < best_area + kTol && dist < best_dist - kTol) {
        better = true;
      }
    }
    if (better) {
      best = k;
      best_cover = cover;
      best_area = area;
      best_dist = dist;
    }
  }
  return best;
}

Footprint glyph_footprint(const BBox& glyph_box, const BBox& window, int out_px) {
  const double w = std::min(glyph_box.x2, window.x2) - std::max(glyph_box.x1, window.x1);
  const double h = std::min(glyph_box.y2, window.y2) - std::max(glyph_box.y1, window.y1);
  if (w <= 0.0 || h <= 0.0) return {};
  return Footprint{w / window.width() * out_px, h / window.height() * out_px};
}

Perception perceive(const Cell& cell, const BBox& window, int out_px, const SynthConfig& cfg) {
  const Footprint fp = glyph_footprint(cell.glyph_box, window, out_px);
  const double side = std::min(fp.width_px, fp.height_px);
  if (side >= cfg.legible_px) return Perception::kLegible;
  if (side >= cfg.shape_px) return Perception::kShape;
  if (side >= cfg.color_px) return Perception::kColor;
  return Perception::kNone;
}

bool legibility_oracle(const Scene& scene, const BBox& window, int out_w, const SynthConfig& cfg) {
  const Footprint fp = glyph_footprint(scene.target().glyph_box, window, out_w);
  return fp.width_px >= cfg.legible_px && fp.height_px >= cfg.legible_px;
}

int required_zoom_depth(const Scene& scene, int max_depth, const SynthConfig& cfg) {
  BBox view = kFullFrame;
  for (int depth = 0; depth <= max_depth; ++depth) {
    if (legibility_oracle(scene, view, cfg.base_resolution, cfg)) return depth;
    view = compose(view, zoom_anchors()[best_anchor_toward(view, scene.target().glyph_box)]);
  }
  return -1;
}

Scene generate_scene(std::uint64_t seed, Difficulty difficulty, const SynthConfig& cfg) {
  const DifficultyProfile prof = profile_for(difficulty);
  Engine eng(derive_seed(seed, {0x5CE7E, static_cast<std::uint64_t>(difficulty)}));

  for (int attempt = 0;; ++attempt) {
    const Cue cue{static_cast<GlyphColor>(uniform_int(eng, 0, kNumColors - 1)),
                  static_cast<GlyphShape>(uniform_int(eng, 0, kNumShapes - 1))};
    auto cells = try_layout(eng, prof, cfg, cue);
    if (!cells) continue;

    // Target was laid out first; shuffle so its index carries no information.
    for (std::size_t i = cells->size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(eng, 0, static_cast<std::int64_t>(i)));
      std::swap((*cells)[i], (*cells)[j]);
    }

    Scene scene;
    scene.seed = seed;
    scene.difficulty = difficulty;
    scene.canvas_size = cfg.canvas_size;
    scene.cells = std::move(*cells);
    for (std::size_t i = 0; i < scene.cells.size(); ++i) {
      if (scene.cells[i].is_target) scene.target_cell = i;
    }
    scene.distractor_count = prof.decoys;

    const int depth = required_zoom_depth(scene, 4, cfg);
    if (depth < prof.min_depth || depth > prof.max_depth) continue;
    return scene;
  }
}

QAPair make_qa(const Scene& scene) {
  const Cell& t = scene.target();
  const std::string cue = std::string(to_string(t.color)) + " " + std::string(to_string(t.shape));
  std::string question;
  switch (mix64(scene.seed ^ 0x9A) % 3) {
    case 0:
      question = "What digit is written inside the " + cue + "?";
      break;
    case 1:
      question = "Which digit appears in the " + cue + "?";
      break;
    default:
      question = "Find the " + cue + ". What digit does it contain?";
      break;
  }
  return QAPair{std::move(question), std::to_string(t.digit), t.region};
}

std::optional<Cue> parse_cue(std::string_view question) {
  for (int c = 0; c < kNumColors; ++c) {
    for (int s = 0; s < kNumShapes; ++s) {
      const auto color = static_cast<GlyphColor>(c);
      const auto shape = static_cast<GlyphShape>(s);
      const std::string phrase =
          std::string(to_string(color)) + " " + std::string(to_string(shape));
      if (question.find(phrase) != std::string_view::npos) return Cue{color, shape};
    }
  }
  return std::nullopt;
}

Image render(const Scene& scene, const BBox& window, int out_w, int out_h,
             const SynthConfig& cfg) {
  if (out_w < cfg.min_render_px || out_h < cfg.min_render_px) {
    throw Error(ErrorCode::kDegenerateBox, "render resolution " + std::to_string(out_w) + "x" +
                                               std::to_string(out_h) + " is below " +
                                               std::to_string(cfg.min_render_px) + " px");
  }
  if (!window.is_valid() || window.area() < cfg.min_box_area) {
    throw Error(ErrorCode::kDegenerateBox, "render window is empty or below the minimum area");
  }

  Image img;
  img.width = out_w;
  img.height = out_h;
  img.window = window;
  img.pixels.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = kBackground.r;
    img.pixels[i + 1] = kBackground.g;
    img.pixels[i + 2] = kBackground.b;
  }

  const double ww = window.width();
  const double wh = window.height();
  auto sample_x = [&](int i) { return window.x1 + (i + 0.5) * ww / out_w; };
  auto sample_y = [&](int j) { return window.y1 + (j + 0.5) * wh / out_h; };

  for (const Cell& cell : scene.cells) {
    const BBox& r = cell.region;
    if (r.x2 <= window.x1 || r.x1 >= window.x2 || r.y2 <= window.y1 || r.y1 >= window.y2) continue;
    const int i0 = std::max(0, static_cast<int>(std::floor((r.x1 - window.x1) / ww * out_w)) - 1);
    const int i1 = std::min(out_w - 1, static_cast<int>(std::ceil((r.x2 - window.x1) / ww * out_w)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((r.y1 - window.y1) / wh * out_h)) - 1);
    const int j1 = std::min(out_h - 1, static_cast<int>(std::ceil((r.y2 - window.y1) / wh * out_h)) + 1);
    for (int j = j0; j <= j1; ++j) {
      const double y = sample_y(j);
      if (y < r.y1 || y >= r.y2) continue;
      for (int i = i0; i <= i1; ++i) {
        const double x = sample_x(i);
        if (x < r.x1 || x >= r.x2) continue;
        const Rgb c = shade_cell(cell, x, y);
        std::uint8_t* px = &img.pixels[(static_cast<std::size_t>(j) * out_w + i) * 3];
        px[0] = c.r;
        px[1] = c.g;
        px[2] = c.b;
      }
    }
  }
  return img;
}

Image render_crop(const Scene& scene, const Image& parent, int parent_index, const BBox& bbox,
                  int out_w, int out_h, const SynthConfig& cfg) {
  if (!bbox.is_valid() || bbox.area() < cfg.min_box_area) {
    throw Error(ErrorCode::kDegenerateBox, "crop box is empty or below the minimum area");
  }
  Image img = render(scene, compose(parent.window, bbox), out_w, out_h, cfg);
  img.provenance = CropProvenance{parent_index, bbox};
  return img;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

bool verify_answer(const Scene& /*scene*/, const QAPair& qa, std::string_view answer_text) {
  return normalize_answer(answer_text) == normalize_answer(qa.answer);
}

std::string to_jsonl(const DatasetRecord& rec) {
  nlohmann::ordered_json j;
  j["seed"] = rec.seed;
  j["difficulty"] = to_string(rec.difficulty);
  j["question"] = rec.qa.question;
  j["answer"] = rec.qa.answer;
  const BBox& b = rec.qa.target_region;
  j["target_region"] = {b.x1, b.y1, b.x2, b.y2};
  return j.dump();
}

DatasetRecord dataset_record_from_json(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kIo, "dataset line is not a JSON object");
  }
  try {
    DatasetRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
    rec.qa.question = j.at("question").get<std::string>();
    rec.qa.answer = j.at("answer").get<std::string>();
    const auto& r = j.at("target_region");
    rec.qa.target_region = BBox{r.at(0).get<double>(), r.at(1).get<double>(),
                                r.at(2).get<double>(), r.at(3).get<double>()};
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed dataset record: ") + e.what());
  }
}

}  // namespace zoomrl
