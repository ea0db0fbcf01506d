#include "qmghost/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qmg {

using json = nlohmann::json;

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Simulate: return "simulate";
    case RunMode::VerifyLaws: return "verify-laws";
    case RunMode::LensLaw: return "lens-law";
    case RunMode::FoldCheck: return "fold-check";
  }
  return "?";
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& s : issues) out += "\n  " + s;
  return out;
}

struct Issues {
  std::vector<std::string> list;
  void add(const std::string& path, const std::string& msg) { list.push_back(path + ": " + msg); }
};

// One JSON object being read: tracks consumed keys so leftovers can be
// reported, and mirrors every value (defaults included) into `echo`.
class Section {
 public:
  Section(const json* node, std::string path, Issues& issues, json& echo)
      : node_(node), path_(std::move(path)), issues_(issues), echo_(echo) {
    if (node_ && !node_->is_object()) {
      issues_.add(path_, "expected an object");
      node_ = nullptr;
    }
    echo_ = json::object();
  }

  ~Section() {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!used_.count(it.key())) issues_.add(at(it.key()), "unknown field");
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }
  const json* raw(const std::string& key) {
    used_.insert(key);
    return has(key) ? &(*node_)[key] : nullptr;
  }
  void consume_all() {
    if (node_)
      for (auto it = node_->begin(); it != node_->end(); ++it) used_.insert(it.key());
  }
  json& echo() { return echo_; }
  Issues& issues() { return issues_; }

  std::optional<double> number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) echo_[key] = *fallback;
      return fallback;
    }
    if (!v->is_number()) {
      issues_.add(at(key), "expected a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      issues_.add(at(key), "must be finite");
      return std::nullopt;
    }
    echo_[key] = d;
    return d;
  }

  double required(const std::string& key) {
    if (!has(key)) {
      raw(key);
      issues_.add(at(key), "required field is missing");
      return 0;
    }
    return number(key).value_or(0);
  }

  std::optional<std::uint64_t> count(const std::string& key, std::optional<std::uint64_t> fallback) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) echo_[key] = *fallback;
      return fallback;
    }
    if (!v->is_number_unsigned()) {
      issues_.add(at(key), "expected a non-negative integer");
      return std::nullopt;
    }
    echo_[key] = v->get<std::uint64_t>();
    return v->get<std::uint64_t>();
  }

  std::optional<std::string> text(const std::string& key, std::optional<std::string> fallback) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) echo_[key] = *fallback;
      return fallback;
    }
    if (!v->is_string()) {
      issues_.add(at(key), "expected a string");
      return std::nullopt;
    }
    echo_[key] = v->get<std::string>();
    return v->get<std::string>();
  }

  std::optional<Vec2> vec2(const std::string& key, std::optional<Vec2> fallback) {
    const json* v = raw(key);
    if (!v) {
      if (fallback) echo_[key] = {fallback->x, fallback->y};
      return fallback;
    }
    auto p = parse_vec2(*v, at(key), issues_);
    if (p) echo_[key] = {p->x, p->y};
    return p;
  }

  std::optional<Vec3> vec3(const std::string& key, Vec3 fallback) {
    const json* v = raw(key);
    if (!v) {
      echo_[key] = {fallback.x, fallback.y, fallback.z};
      return fallback;
    }
    if (!v->is_array() || v->size() != 3 || !(*v)[0].is_number() || !(*v)[1].is_number() ||
        !(*v)[2].is_number()) {
      issues_.add(at(key), "expected [x, y, z]");
      return std::nullopt;
    }
    const Vec3 out{(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>()};
    echo_[key] = {out.x, out.y, out.z};
    return out;
  }

  static std::optional<Vec2> parse_vec2(const json& v, const std::string& path, Issues& issues) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      issues.add(path, "expected [x, y]");
      return std::nullopt;
    }
    return Vec2{v[0].get<double>(), v[1].get<double>()};
  }

 private:
  const json* node_;
  std::string path_;
  Issues& issues_;
  json& echo_;
  std::set<std::string> used_;
};

std::optional<RunMode> parse_mode(const std::string& s) {
  if (s == "simulate") return RunMode::Simulate;
  if (s == "verify-laws") return RunMode::VerifyLaws;
  if (s == "lens-law") return RunMode::LensLaw;
  if (s == "fold-check") return RunMode::FoldCheck;
  return std::nullopt;
}

void positive(Issues& issues, const std::string& path, std::optional<double> v) {
  if (v && !(*v > 0)) issues.add(path, "must be positive");
}

std::optional<Mask> parse_mask(Section& s, const std::string& base_dir) {
  const auto shape = s.text("shape", std::nullopt);
  if (!shape) {
    if (!s.has("shape")) s.issues().add(s.at("shape"), "required field is missing");
    return std::nullopt;
  }
  Issues& issues = s.issues();
  if (*shape == "open") return Mask::open();
  if (*shape == "opaque") return Mask::opaque();
  if (*shape == "double_slit") {
    const double sep = s.required("separation");
    const double width = s.required("width");
    const double height = s.required("height");
    positive(issues, s.at("width"), width);
    positive(issues, s.at("height"), height);
    if (!(sep > width)) issues.add(s.at("separation"), "must exceed the slit width");
    if (!(sep > width && width > 0 && height > 0)) return std::nullopt;
    return Mask::double_slit(sep, width, height);
  }
  if (*shape == "union") {
    const json* parts = s.raw("parts");
    if (!parts || !parts->is_array() || parts->empty()) {
      issues.add(s.at("parts"), "expected a non-empty array of shapes");
      return std::nullopt;
    }
    std::vector<Mask::Shape> shapes;
    json echo_parts = json::array();
    bool ok = true;
    for (std::size_t i = 0; i < parts->size(); ++i) {
      const std::string path = s.at("parts") + "[" + std::to_string(i) + "]";
      json echo_part;
      Section ps(&(*parts)[i], path, issues, echo_part);
      const auto kind = ps.text("kind", std::nullopt);
      if (kind == "rect") {
        const auto c = ps.vec2("center", Vec2{});
        const auto sz = ps.vec2("size", std::nullopt);
        if (!sz) {
          if (!ps.has("size")) issues.add(ps.at("size"), "required field is missing");
          ok = false;
        } else if (!(sz->x > 0 && sz->y > 0)) {
          issues.add(ps.at("size"), "must be positive");
          ok = false;
        } else if (c) {
          shapes.emplace_back(Mask::Rect{*c, *sz});
        }
      } else if (kind == "disk") {
        const auto c = ps.vec2("center", Vec2{});
        const double r = ps.required("radius");
        positive(issues, ps.at("radius"), r);
        if (c && r > 0) shapes.emplace_back(Mask::Disk{*c, r});
        else ok = false;
      } else if (kind == "polygon") {
        const json* v = ps.raw("vertices");
        Mask::Polygon poly;
        if (!v || !v->is_array() || v->size() < 3) {
          issues.add(ps.at("vertices"), "expected at least three [x, y] vertices");
          ok = false;
        } else {
          json ev = json::array();
          for (std::size_t k = 0; k < v->size(); ++k) {
            auto p = Section::parse_vec2((*v)[k], ps.at("vertices") + "[" + std::to_string(k) + "]", issues);
            if (!p) {
              ok = false;
              continue;
            }
            poly.vertices.push_back(*p);
            ev.push_back({p->x, p->y});
          }
          ps.echo()["vertices"] = ev;
          shapes.emplace_back(poly);
        }
      } else {
        issues.add(ps.at("kind"), "expected rect, disk or polygon");
        ok = false;
      }
      echo_parts.push_back(echo_part);
    }
    s.echo()["parts"] = echo_parts;
    if (!ok) return std::nullopt;
    return Mask::shapes(std::move(shapes));
  }
  if (*shape == "pgm") {
    const auto path = s.text("path", std::nullopt);
    const double pitch = s.required("pitch");
    const auto center = s.vec2("center", Vec2{});
    positive(issues, s.at("pitch"), pitch);
    if (!path) {
      if (!s.has("path")) issues.add(s.at("path"), "required field is missing");
      return std::nullopt;
    }
    if (!(pitch > 0) || !center) return std::nullopt;
    std::filesystem::path file(*path);
    if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
    try {
      return Mask::from_pgm(read_pgm_file(file.string()), pitch, *center);
    } catch (const Error& e) {
      issues.add(s.at("path"), e.what());
      return std::nullopt;
    }
  }
  issues.add(s.at("shape"), "expected open, opaque, double_slit, union or pgm");
  return std::nullopt;
}

std::vector<Element> parse_arm(const json* node, const std::string& path, Issues& issues, json& echo,
                               const std::string& base_dir, bool idler, std::optional<Mask>* first_mask) {
  std::vector<Element> out;
  echo = json::array();
  if (!node) {
    issues.add(path, "required field is missing");
    return out;
  }
  if (!node->is_array() || node->empty()) {
    issues.add(path, "expected a non-empty array of elements");
    return out;
  }
  for (std::size_t i = 0; i < node->size(); ++i) {
    const std::string epath = path + "[" + std::to_string(i) + "]";
    json e;
    Section s(&(*node)[i], epath, issues, e);
    const auto type = s.text("type", std::nullopt);
    if (!type) {
      if (!s.has("type")) issues.add(s.at("type"), "required field is missing");
    } else if (*type == "free_space") {
      const double d = s.required("d");
      positive(issues, s.at("d"), d);
      out.emplace_back(FreeSpace{d});
    } else if (*type == "thin_lens") {
      const double f = s.required("f");
      if (s.has("f") && f == 0) issues.add(s.at("f"), "must be nonzero");
      ThinLens lens{f};
      if (s.has("aperture_radius")) {
        lens.aperture_radius = *s.number("aperture_radius", 0.0);
        positive(issues, s.at("aperture_radius"), lens.aperture_radius);
      }
      out.emplace_back(lens);
    } else if (*type == "mask") {
      if (idler) {
        issues.add(epath, "object must be in signal arm only");
        s.consume_all();
      } else if (auto m = parse_mask(s, base_dir)) {
        if (first_mask && !*first_mask) *first_mask = *m;
        out.emplace_back(MaskElement{*m});
      }
    } else if (*type == "bucket") {
      const double r = s.required("radius");
      positive(issues, s.at("radius"), r);
      out.emplace_back(BucketDetector{r});
    } else if (*type == "scanning_detector") {
      const auto nx = s.count("nx", std::nullopt);
      const auto ny = s.count("ny", std::nullopt);
      const double pitch = s.required("pitch");
      if (!nx || *nx == 0) issues.add(s.at("nx"), "required positive integer");
      if (!ny || *ny == 0) issues.add(s.at("ny"), "required positive integer");
      positive(issues, s.at("pitch"), pitch);
      out.emplace_back(ScanningDetector{static_cast<int>(nx.value_or(0)), static_cast<int>(ny.value_or(0)), pitch});
    } else {
      issues.add(s.at("type"), "expected free_space, thin_lens, mask, bucket or scanning_detector");
    }
    echo.push_back(e);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(ErrorKind::Config, join_issues(issues)), issues_(std::move(issues)) {}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("<root>: ") + e.what()});
  }

  Issues issues;
  RunConfig cfg;
  json echo;
  {
    Section root(&doc, "", issues, echo);

    if (overrides.mode) {
      root.raw("mode");
      cfg.mode = *overrides.mode;
    } else if (const auto m = root.text("mode", std::string("simulate"))) {
      if (const auto mode = parse_mode(*m)) cfg.mode = *mode;
      else issues.add("mode", "expected simulate, verify-laws, lens-law or fold-check");
    }
    echo["mode"] = to_string(cfg.mode);

    if (const auto u = root.text("units", std::string("normalized"))) {
      if (*u == "si") cfg.units = UnitSystem::si();
      else if (*u != "normalized") issues.add("units", "expected normalized or si");
    }

    if (overrides.seed) {
      root.raw("seed");
      cfg.seed = *overrides.seed;
      echo["seed"] = cfg.seed;
    } else {
      cfg.seed = root.count("seed", 0).value_or(0);
    }

    if (overrides.workers) {
      root.raw("workers");
      cfg.workers = *overrides.workers;
    } else {
      cfg.workers = static_cast<int>(root.count("workers", 1).value_or(1));
    }
    if (cfg.workers < 1) issues.add("workers", "must be at least 1");
    echo.erase("workers");

    if (overrides.output_dir) {
      root.raw("output_dir");
      cfg.output_dir = *overrides.output_dir;
    } else {
      cfg.output_dir = root.text("output_dir", std::string()).value_or("");
    }
    echo.erase("output_dir");

    const bool needs_scene = cfg.mode == RunMode::Simulate || cfg.mode == RunMode::FoldCheck;

    // Pump and source.
    const json* pump_node = root.raw("pump");
    if (needs_scene || pump_node) {
      json pe;
      Section ps(pump_node, "pump", issues, pe);
      if (needs_scene && !pump_node) issues.add("pump", "required field is missing");
      const auto kind = ps.text("kind", std::string("plane"));
      const double omega_p = ps.number("omega_p", 1.0).value_or(1.0);
      positive(issues, "pump.omega_p", omega_p);
      const auto axis = ps.vec3("axis", {0, 0, 1});
      PumpModel pump;
      if (kind == "plane") {
        if (axis && omega_p > 0) {
          try {
            pump = PumpModel::plane(omega_p, *axis);
          } catch (const Error& e) {
            issues.add("pump.axis", e.what());
          }
        }
      } else if (kind == "spherical") {
        const double R = ps.required("R");
        if (ps.has("R") && R == 0) issues.add("pump.R", "must be nonzero");
        if (axis && omega_p > 0 && R != 0) {
          try {
            pump = PumpModel::spherical(omega_p, R, *axis);
          } catch (const Error& e) {
            issues.add("pump", e.what());
          }
        }
      } else if (kind) {
        issues.add("pump.kind", "expected plane or spherical");
      }
      cfg.scene.pump = pump;
      echo["pump"] = pe;
    }

    const json* source_node = root.raw("source");
    if (needs_scene || source_node) {
      json se;
      Section ss(source_node, "source", issues, se);
      if (needs_scene && !source_node) issues.add("source", "required field is missing");
      SpdcConfig& sp = cfg.scene.spdc;
      const double omega_p = cfg.scene.pump.omega_p;
      if (ss.has("omega_s")) {
        const double w = ss.required("omega_s");
        sp.omega_s_min = sp.omega_s_max = w;
        if (!(w > 0)) issues.add("source.omega_s", "must be positive");
        if (!(w < omega_p)) issues.add("source.omega_s", "must be below pump.omega_p");
      } else {
        sp.omega_s_min = ss.number("omega_s_min", omega_p / 2).value_or(0);
        sp.omega_s_max = ss.number("omega_s_max", omega_p / 2).value_or(0);
        if (!(sp.omega_s_min > 0)) issues.add("source.omega_s_min", "must be positive");
        if (!(sp.omega_s_min < omega_p)) issues.add("source.omega_s_min", "must be below pump.omega_p");
        if (!(sp.omega_s_max < omega_p)) issues.add("source.omega_s_max", "must be below pump.omega_p");
        if (!(sp.omega_s_max >= sp.omega_s_min))
          issues.add("source.omega_s_max", "must not be below source.omega_s_min");
      }
      sp.sigma_k = ss.number("sigma_k", 0.0).value_or(0);
      if (!(sp.sigma_k >= 0)) issues.add("source.sigma_k", "must be non-negative");
      sp.spot_radius = ss.number("spot_radius", 0.0).value_or(0);
      if (!(sp.spot_radius >= 0)) issues.add("source.spot_radius", "must be non-negative");
      sp.sampling_law = ss.text("sampling_law", std::string("gaussian")).value_or("gaussian");
      if (sp.sampling_law != "gaussian") issues.add("source.sampling_law", "only gaussian is supported");
      sp.units = cfg.units;
      sp.seed = cfg.seed;
      echo["source"] = se;
    }

    // Arms.
    const json* sig = root.raw("signal_arm");
    const json* idl = root.raw("idler_arm");
    if (needs_scene || sig || idl) {
      json se, ie;
      std::optional<Mask> first_mask;
      auto sig_elems = parse_arm(sig, "signal_arm", issues, se, base_dir, false, &first_mask);
      auto idl_elems = parse_arm(idl, "idler_arm", issues, ie, base_dir, true, nullptr);
      echo["signal_arm"] = se;
      echo["idler_arm"] = ie;
      cfg.object = first_mask;
      const std::size_t before = issues.list.size();
      if (before == 0) {
        try {
          cfg.scene.signal_arm = Arm(ArmId::Signal, std::move(sig_elems));
        } catch (const Error& e) {
          issues.add("signal_arm", e.what());
        }
        try {
          cfg.scene.idler_arm = Arm(ArmId::Idler, std::move(idl_elems));
        } catch (const Error& e) {
          issues.add("idler_arm", e.what());
        }
      }
    }

    if (overrides.n_pairs) {
      root.raw("n_pairs");
      cfg.scene.n_pairs = *overrides.n_pairs;
      echo["n_pairs"] = cfg.scene.n_pairs;
    } else {
      cfg.scene.n_pairs = root.count("n_pairs", 0).value_or(0);
    }
    cfg.scene.seed = cfg.seed;

    if (const json* bg = root.raw("background")) {
      json be;
      Section bs(bg, "background", issues, be);
      cfg.scene.background.dark_mean_per_pixel = bs.number("dark_mean_per_pixel", 0.0).value_or(0);
      cfg.scene.background.accidental_mean_per_pixel = bs.number("accidental_mean_per_pixel", 0.0).value_or(0);
      if (!(cfg.scene.background.dark_mean_per_pixel >= 0))
        issues.add("background.dark_mean_per_pixel", "must be non-negative");
      if (!(cfg.scene.background.accidental_mean_per_pixel >= 0))
        issues.add("background.accidental_mean_per_pixel", "must be non-negative");
      echo["background"] = be;
    }

    cfg.fold_seed = root.count("fold_seed", cfg.seed + 1).value_or(cfg.seed + 1);

    {
      json ae;
      Section as(root.raw("analysis"), "analysis", issues, ae);
      AnalysisConfig& a = cfg.analysis;
      a.smoothing_box = static_cast<int>(as.count("smoothing_box", 5).value_or(5));
      if (a.smoothing_box < 1) issues.add("analysis.smoothing_box", "must be at least 1");
      {
        json ge;
        Section gs(as.raw("scale_grid"), "analysis.scale_grid", issues, ge);
        ScaleGrid& g = a.scale_grid;
        g.min = gs.number("min", g.min).value_or(g.min);
        g.max = gs.number("max", g.max).value_or(g.max);
        g.step = gs.number("step", g.step).value_or(g.step);
        g.supersample = static_cast<int>(gs.count("supersample", 16).value_or(16));
        positive(issues, "analysis.scale_grid.min", g.min);
        positive(issues, "analysis.scale_grid.step", g.step);
        if (!(g.max >= g.min)) issues.add("analysis.scale_grid.max", "must not be below min");
        if (g.supersample < 1) issues.add("analysis.scale_grid.supersample", "must be at least 1");
        ae["scale_grid"] = ge;
      }
      if (as.has("expected_magnification")) {
        a.expected_magnification = as.number("expected_magnification");
        positive(issues, "analysis.expected_magnification", a.expected_magnification);
      }
      a.magnification_tolerance = as.number("magnification_tolerance", a.magnification_tolerance).value_or(0);
      a.max_singles_contrast = as.number("max_singles_contrast", a.max_singles_contrast).value_or(0);
      a.min_coincidence_contrast = as.number("min_coincidence_contrast", a.min_coincidence_contrast).value_or(0);
      a.chi2_min = as.number("chi2_min", a.chi2_min).value_or(0);
      a.chi2_max = as.number("chi2_max", a.chi2_max).value_or(0);
      a.min_counts = as.number("min_counts", a.min_counts).value_or(0);
      if (!(a.magnification_tolerance > 0)) issues.add("analysis.magnification_tolerance", "must be positive");
      if (!(a.chi2_max > a.chi2_min)) issues.add("analysis.chi2_max", "must exceed chi2_min");
      if (!(a.min_counts > 0)) issues.add("analysis.min_counts", "must be positive");
      echo["analysis"] = ae;
    }

    if (cfg.mode == RunMode::VerifyLaws || root.has("sweep")) {
      json we;
      Section ws(root.raw("sweep"), "sweep", issues, we);
      SweepConfig& w = cfg.sweep;
      w.cases = ws.count("cases", w.cases).value_or(0);
      if (w.cases == 0) issues.add("sweep.cases", "must be at least 1");
      if (const json* h = ws.raw("h_rel")) {
        w.h_rel.clear();
        if (!h->is_array()) {
          issues.add("sweep.h_rel", "expected an array of numbers");
        } else {
          for (const auto& v : *h) {
            if (v.is_number()) w.h_rel.push_back(v.get<double>());
            else issues.add("sweep.h_rel", "expected an array of numbers");
          }
        }
      }
      we["h_rel"] = w.h_rel;
      if (w.h_rel.size() < 4) issues.add("sweep.h_rel", "needs at least four heights");
      double lo = INFINITY, hi = 0;
      for (double h : w.h_rel) {
        lo = std::min(lo, h);
        hi = std::max(hi, h);
      }
      if (!w.h_rel.empty() && (!(lo > 0) || hi / lo < 100 - 1e-9))
        issues.add("sweep.h_rel", "must be positive and span at least two decades");
      if (hi > 0.1) issues.add("sweep.h_rel", "heights must stay at or below p / 10");
      w.slope_min = ws.number("slope_min", w.slope_min).value_or(0);
      w.slope_max = ws.number("slope_max", w.slope_max).value_or(0);
      if (!(w.slope_max > w.slope_min)) issues.add("sweep.slope_max", "must exceed slope_min");
      echo["sweep"] = we;
    }

    if (cfg.mode == RunMode::LensLaw || root.has("lens")) {
      json le;
      Section ls(root.raw("lens"), "lens", issues, le);
      if (!root.has("lens")) issues.add("lens", "required field is missing");
      LensSweep& l = cfg.lens;
      l.f = ls.required("f");
      l.so_min = ls.required("so_min");
      l.so_max = ls.required("so_max");
      l.so_step = ls.required("so_step");
      if (ls.has("f") && l.f == 0) issues.add("lens.f", "must be nonzero");
      positive(issues, "lens.so_min", l.so_min);
      positive(issues, "lens.so_step", l.so_step);
      if (!(l.so_max >= l.so_min)) issues.add("lens.so_max", "must not be below so_min");
      echo["lens"] = le;
    }

    if (issues.list.empty() && needs_scene) {
      try {
        cfg.scene.spdc.validate(cfg.scene.pump);
        cfg.scene.validate();
      } catch (const Error& e) {
        issues.add("scene", e.what());
      }
    }
    if (issues.list.empty() && cfg.mode == RunMode::FoldCheck) {
      try {
        fold_klyshko(cfg.scene.signal_arm, cfg.scene.idler_arm, cfg.scene.pump, cfg.scene.spdc.omega_s_min,
                     cfg.scene.spdc.omega_s_max);
      } catch (const Error& e) {
        issues.add("scene", e.what());
      }
    }
  }  // root section reports unknown fields here

  if (!issues.list.empty()) throw ConfigError(issues.list);

  cfg.hash = fnv1a_hex(echo.dump());
  json full = echo;
  full["workers"] = cfg.workers;
  full["output_dir"] = cfg.output_dir;
  cfg.canonical = full.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), overrides, dir.empty() ? "." : dir.string());
}

RunConfig lens_law_config(const LensSweep& sweep) {
  json doc = {{"mode", "lens-law"},
              {"lens", {{"f", sweep.f}, {"so_min", sweep.so_min}, {"so_max", sweep.so_max}, {"so_step", sweep.so_step}}}};
  return parse_config(doc.dump());
}

}  // namespace qmg
