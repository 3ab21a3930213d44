#include "vididi/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vididi/parallel.hpp"
#include "vididi/rng.hpp"
#include "vididi/tensor_io.hpp"

namespace vididi {

namespace {

using nlohmann::json;

constexpr std::size_t kNoiseCell = 4;
constexpr double kApexLo = 0.35;
constexpr double kApexHi = 0.65;

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Bilinearly interpolated lattice noise in [0,1], one lattice per channel.
double value_noise(std::size_t channel, double row, double col, std::size_t lattice_h,
                   std::size_t lattice_w, const std::vector<double>& lattice) {
  const double gy = row / static_cast<double>(kNoiseCell);
  const double gx = col / static_cast<double>(kNoiseCell);
  const auto y0 = static_cast<std::size_t>(std::floor(gy));
  const auto x0 = static_cast<std::size_t>(std::floor(gx));
  const double fy = gy - static_cast<double>(y0);
  const double fx = gx - static_cast<double>(x0);
  auto at = [&](std::size_t y, std::size_t x) {
    return lattice[channel * lattice_h * lattice_w + y * lattice_w + x];
  };
  const double top = at(y0, x0) + fx * (at(y0, x0 + 1) - at(y0, x0));
  const double bot = at(y0 + 1, x0) + fx * (at(y0 + 1, x0 + 1) - at(y0 + 1, x0));
  return top + fy * (bot - top);
}

json latents_to_json(const SceneLatents& l) {
  return json{{"texture_seed", l.texture_seed},
              {"noise_seed", l.noise_seed},
              {"base_intensity", l.base_intensity},
              {"texture_amplitude", l.texture_amplitude},
              {"noise_amplitude", l.noise_amplitude},
              {"tint_amplitude", l.tint_amplitude},
              {"x", l.x},
              {"y0", l.y0},
              {"v0", l.v0},
              {"g", l.g},
              {"radius", l.radius},
              {"sprite_amplitude", l.sprite_amplitude}};
}

SceneLatents latents_from_json(const json& j) {
  SceneLatents l;
  l.texture_seed = j.at("texture_seed").get<std::uint64_t>();
  l.noise_seed = j.at("noise_seed").get<std::uint64_t>();
  l.base_intensity = j.at("base_intensity").get<double>();
  l.texture_amplitude = j.at("texture_amplitude").get<double>();
  l.noise_amplitude = j.at("noise_amplitude").get<double>();
  l.tint_amplitude = j.at("tint_amplitude").get<double>();
  l.x = j.at("x").get<double>();
  l.y0 = j.at("y0").get<double>();
  l.v0 = j.at("v0").get<double>();
  l.g = j.at("g").get<double>();
  l.radius = j.at("radius").get<double>();
  l.sprite_amplitude = j.at("sprite_amplitude").get<double>();
  return l;
}

}  // namespace

VideoTensor render_background(const SceneLatents& latents, std::size_t channels,
                              std::size_t height, std::size_t width) {
  const std::size_t lattice_h = height / kNoiseCell + 2;
  const std::size_t lattice_w = width / kNoiseCell + 2;
  Rng texture(latents.texture_seed, {key_of("texture")});
  std::vector<double> tint(channels);
  for (auto& t : tint) t = latents.tint_amplitude * texture.uniform(-1.0, 1.0);
  std::vector<double> lattice(channels * lattice_h * lattice_w);
  for (auto& v : lattice) v = texture.uniform();

  Rng noise(latents.noise_seed, {key_of("bg-noise")});
  VideoTensor bg(channels, 1, height, width);
  for (std::size_t c = 0; c < channels; ++c) {
    auto plane = bg.plane(c, 0);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double tex = value_noise(c, static_cast<double>(y), static_cast<double>(x),
                                       lattice_h, lattice_w, lattice);
        double v = latents.base_intensity + tint[c] +
                   latents.texture_amplitude * (2.0 * tex - 1.0) +
                   latents.noise_amplitude * (2.0 * noise.uniform() - 1.0);
        plane[y * width + x] = round_f32(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return bg;
}

VideoTensor render_sprite(const SceneLatents& latents, double t, std::size_t channels,
                          std::size_t height, std::size_t width) {
  VideoTensor out(channels, 1, height, width);
  const double rc = height_to_row(latents.height_at(t), height);
  const double cc = latents.x;
  const double r = latents.radius;
  const auto y_lo = static_cast<std::ptrdiff_t>(std::floor(rc - r));
  const auto y_hi = static_cast<std::ptrdiff_t>(std::ceil(rc + r));
  const auto x_lo = static_cast<std::ptrdiff_t>(std::floor(cc - r));
  const auto x_hi = static_cast<std::ptrdiff_t>(std::ceil(cc + r));
  for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, y_lo);
       y <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(height) - 1, y_hi); ++y) {
    for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, x_lo);
         x <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(width) - 1, x_hi); ++x) {
      const double d = std::hypot(static_cast<double>(y) - rc, static_cast<double>(x) - cc);
      if (d >= r) continue;
      const double p = latents.sprite_amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * d / r));
      for (std::size_t c = 0; c < channels; ++c) {
        out.plane(c, 0)[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] = p;
      }
    }
  }
  return out;
}

VideoTensor render_frame(const SceneLatents& latents, std::size_t t, std::size_t channels,
                         std::size_t height, std::size_t width) {
  VideoTensor frame = render_background(latents, channels, height, width);
  const VideoTensor sprite = render_sprite(latents, static_cast<double>(t), channels, height, width);
  auto dst = frame.data();
  auto src = sprite.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (src[i] != 0.0) dst[i] = round_f32(std::clamp(dst[i] + src[i], 0.0, 1.0));
  }
  return frame;
}

VideoTensor render_video(const SceneLatents& latents, std::size_t frames, std::size_t channels,
                         std::size_t height, std::size_t width) {
  const VideoTensor bg = render_background(latents, channels, height, width);
  VideoTensor video = broadcast_frames(bg, frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const VideoTensor sprite =
        render_sprite(latents, static_cast<double>(t), channels, height, width);
    for (std::size_t c = 0; c < channels; ++c) {
      auto dst = video.plane(c, t);
      auto src = sprite.plane(c, 0);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        if (src[i] != 0.0) dst[i] = round_f32(std::clamp(dst[i] + src[i], 0.0, 1.0));
      }
    }
  }
  return video;
}

bool sprite_inside(const SceneLatents& latents, double t, std::size_t height, std::size_t width) {
  const double rc = height_to_row(latents.height_at(t), height);
  const double r = latents.radius;
  return rc - r >= 0.0 && rc + r <= static_cast<double>(height) - 1.0 && latents.x - r >= 0.0 &&
         latents.x + r <= static_cast<double>(width) - 1.0;
}

bool sprite_outside(const SceneLatents& latents, double t, std::size_t height, std::size_t width) {
  const double rc = height_to_row(latents.height_at(t), height);
  const double r = latents.radius;
  return rc + r <= 0.0 || rc - r >= static_cast<double>(height) - 1.0 || latents.x + r <= 0.0 ||
         latents.x - r >= static_cast<double>(width) - 1.0;
}

double sprite_height_centroid(const VideoTensor& video, std::size_t t,
                              const VideoTensor& background) {
  auto frame = video.plane(0, t);
  auto bg = background.plane(0, 0);
  double mass = 0.0;
  double moment = 0.0;
  for (std::size_t y = 0; y < video.height(); ++y) {
    for (std::size_t x = 0; x < video.width(); ++x) {
      const double w = frame[y * video.width() + x] - bg[y * video.width() + x];
      mass += w;
      moment += w * static_cast<double>(y);
    }
  }
  if (!(mass > 0.0)) throw std::runtime_error("sprite_height_centroid: no sprite in frame");
  return static_cast<double>(video.height()) - 1.0 - moment / mass;
}

std::vector<double> track_sprite(const VideoTensor& video, const VideoTensor& background) {
  std::vector<double> track(video.frames());
  for (std::size_t t = 0; t < video.frames(); ++t) {
    track[t] = sprite_height_centroid(video, t, background);
  }
  return track;
}

std::vector<std::size_t> SynthDataset::indices_of_split(const std::string& split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (meta[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<double> default_g_values(std::size_t classes, std::size_t frames, std::size_t height,
                                     double radius) {
  if (classes == 0) throw std::invalid_argument("default_g_values: need at least one class");
  if (frames < 3) throw std::invalid_argument("default_g_values: need at least 3 frames");
  const double usable = static_cast<double>(height) - 1.0 - 2.0 * radius - 1.0;
  if (usable <= 0.0) throw std::invalid_argument("default_g_values: frame too small for sprite");
  const double apex_t = kApexHi * static_cast<double>(frames - 1);
  const double g_max = 2.0 * usable / (apex_t * apex_t);
  std::vector<double> g(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    g[k] = g_max * static_cast<double>(k + 1) / static_cast<double>(classes);
  }
  return g;
}

SynthDataset generate(const GenerateOptions& opts) {
  const std::size_t G = opts.g_values.size();
  const std::size_t S = opts.bg_classes;
  if (G == 0 || S == 0) throw std::invalid_argument("generate: need at least one gravity and one background class");
  if (opts.n_videos < G * S) {
    throw std::invalid_argument("generate: " + std::to_string(opts.n_videos) +
                                " videos cannot cover " + std::to_string(G) + " x " +
                                std::to_string(S) + " classes");
  }
  if (opts.shortcut && (G != S || G < 2)) {
    throw std::invalid_argument("generate: shortcut split needs bg_classes == g_classes >= 2");
  }
  if (opts.frames < 3 || opts.height < 4 || opts.width < 4 || opts.channels == 0) {
    throw std::invalid_argument("generate: video too small");
  }

  SynthDataset ds;
  ds.g_values = opts.g_values;
  ds.bg_classes = S;
  ds.shortcut = opts.shortcut;
  ds.seed = opts.seed;
  ds.videos.resize(opts.n_videos);
  ds.meta.resize(opts.n_videos);

  parallel_for(opts.n_videos, opts.workers, [&](std::size_t i) {
    VideoMeta m;
    char id[32];
    std::snprintf(id, sizeof(id), "v%05zu", i);
    m.id = id;
    std::size_t gc, bc;
    if (opts.shortcut) {
      gc = (i / 2) % G;
      const bool test = i % 2 == 1;
      bc = test ? (gc + 1) % G : gc;
      m.split = test ? "test" : "train";
    } else {
      const std::size_t cells = G * S;
      const std::size_t cell = i % cells;
      gc = cell / S;
      bc = cell % S;
      m.split = ((i / cells) + cell) % 2 == 1 ? "test" : "train";
    }
    m.dynamic_label = static_cast<int>(gc);
    m.static_label = static_cast<int>(bc);

    Rng cls(opts.seed, {key_of("bg-class"), bc});
    Rng rng(opts.seed, {key_of("video"), i});
    SceneLatents& l = m.latents;
    l.texture_seed = cls.next_u64();
    l.base_intensity = 0.23 + opts.background_contrast * cls.uniform(-0.05, 0.05);
    l.texture_amplitude = opts.background_contrast * cls.uniform(0.08, 0.14);
    l.tint_amplitude = opts.background_contrast * 0.1;
    l.noise_seed = rng.next_u64();
    l.noise_amplitude = 0.02;
    l.radius = opts.radius;
    l.g = opts.g_values[gc];

    const double last = static_cast<double>(opts.frames - 1);
    const double t_apex = rng.uniform(kApexLo, kApexHi) * last;
    l.v0 = l.g * t_apex;
    const double rel_max = 0.5 * l.g * t_apex * t_apex;
    const double rel_end = l.v0 * last - 0.5 * l.g * last * last;
    const double rel_min = std::min(0.0, rel_end);
    // Height y maps to row H-1-y, so the disk stays inside when
    // y - r >= 0 and y + r <= H - 1.
    const double lo = l.radius - rel_min;
    const double hi = static_cast<double>(opts.height) - 1.0 - l.radius - rel_max;
    l.y0 = hi >= lo ? rng.uniform(lo, hi) : 0.5 * (lo + hi);
    l.x = rng.uniform(l.radius, static_cast<double>(opts.width) - 1.0 - l.radius);

    for (std::size_t t = 0; t < opts.frames; ++t) {
      const double tt = static_cast<double>(t);
      if (!sprite_inside(l, tt, opts.height, opts.width)) m.clipped = true;
      if (sprite_outside(l, tt, opts.height, opts.width)) m.out_of_frame = true;
    }
    ds.videos[i] = render_video(l, opts.frames, opts.channels, opts.height, opts.width);
    ds.meta[i] = std::move(m);
  });
  return ds;
}

VideoTensor background_of(const SynthDataset& ds, std::size_t index) {
  const VideoTensor& v = ds.videos.at(index);
  return render_background(ds.meta.at(index).latents, v.channels(), v.height(), v.width());
}

void save_dataset(const SynthDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write " + (dir / "manifest.jsonl").string());
  for (std::size_t i = 0; i < ds.videos.size(); ++i) {
    const VideoMeta& m = ds.meta[i];
    const VideoTensor& v = ds.videos[i];
    std::filesystem::create_directories(dir / m.id);
    write_tensor_file(dir / m.id / "video.vddi", {video_to_stored(v)});
    json line{{"id", m.id},
              {"path", m.id + "/video.vddi"},
              {"dims", {v.channels(), v.frames(), v.height(), v.width()}},
              {"dynamic_label", m.dynamic_label},
              {"static_label", m.static_label},
              {"split", m.split},
              {"latents", latents_to_json(m.latents)},
              {"clipped", m.clipped},
              {"out_of_frame", m.out_of_frame}};
    manifest << line.dump() << '\n';
  }
  std::ofstream info(dir / "dataset.json", std::ios::trunc);
  info << json{{"g_values", ds.g_values},
               {"bg_classes", ds.bg_classes},
               {"shortcut", ds.shortcut},
               {"seed", ds.seed},
               {"videos", ds.videos.size()}}
              .dump(2)
       << '\n';
  if (!manifest || !info) throw std::runtime_error("write failed in " + dir.string());
}

SynthDataset load_dataset(const std::filesystem::path& dir, std::size_t workers) {
  std::ifstream info_file(dir / "dataset.json");
  std::ifstream manifest(dir / "manifest.jsonl");
  if (!info_file || !manifest) {
    throw std::runtime_error("not a dataset directory: " + dir.string());
  }
  SynthDataset ds;
  const json info = json::parse(info_file);
  ds.g_values = info.at("g_values").get<std::vector<double>>();
  ds.bg_classes = info.at("bg_classes").get<std::size_t>();
  ds.shortcut = info.at("shortcut").get<bool>();
  ds.seed = info.at("seed").get<std::uint64_t>();

  std::vector<std::string> paths;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      VideoMeta m;
      m.id = j.at("id").get<std::string>();
      m.dynamic_label = j.at("dynamic_label").get<int>();
      m.static_label = j.at("static_label").get<int>();
      m.split = j.at("split").get<std::string>();
      m.latents = latents_from_json(j.at("latents"));
      m.clipped = j.value("clipped", false);
      m.out_of_frame = j.value("out_of_frame", false);
      paths.push_back(j.at("path").get<std::string>());
      ds.meta.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  ds.videos.resize(ds.meta.size());
  parallel_for(ds.meta.size(), workers, [&](std::size_t i) {
    const auto tensors = read_tensor_file(dir / paths[i]);
    if (tensors.empty()) throw std::runtime_error("empty tensor file for " + ds.meta[i].id);
    ds.videos[i] = video_from_stored(tensors.front());
  });
  return ds;
}

}  // namespace vididi
