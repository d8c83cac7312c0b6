#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "skindet/color.hpp"
#include "skindet/image.hpp"
#include "skindet/mlp.hpp"
#include "skindet/rng.hpp"

namespace skindet {

// One labeled pixel. image_id is the position of the source image in the
// ingested manifest; (row, col) locate the pixel, so (image_id, row, col)
// identifies it uniquely across the corpus.
struct PixelSample {
  std::uint32_t image_id = 0;
  std::uint16_t row = 0;
  std::uint16_t col = 0;
  std::uint8_t r = 0, g = 0, b = 0;
  std::uint8_t label = 0;  // 1 skin, 0 non-skin
};

enum class MaskPolarity { Normal, Inverted };

struct ManifestEntry {
  std::string image;
  std::string mask;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  MaskPolarity polarity = MaskPolarity::Normal;
};

// Manifest format: one "image_path<TAB>mask_path" per line, '#' comments.
// Relative paths are resolved against the manifest's own directory.
inline CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read manifest: " + path.string());
  const std::filesystem::path base = path.parent_path();
  CorpusManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected image_path<TAB>mask_path");
    const auto resolve = [&](std::string p) {
      std::filesystem::path fp(p);
      return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
    };
    m.entries.push_back({resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))});
  }
  return m;
}

// Entries are written relative to the manifest's directory when possible.
inline void write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  const std::filesystem::path base = path.parent_path();
  for (const ManifestEntry& e : entries) {
    const auto rel = [&](const std::string& p) {
      std::error_code ec;
      const auto r = std::filesystem::proximate(p, base, ec);
      return ec ? p : r.string();
    };
    out << rel(e.image) << "\t" << rel(e.mask) << "\n";
  }
}

struct ImageRecord {
  std::uint32_t id = 0;
  ManifestEntry entry;
  int width = 0, height = 0;
  std::size_t first_sample = 0;  // offset of this image's pixels in the pool
};

struct PixelPool {
  std::vector<PixelSample> samples;
  std::vector<ImageRecord> images;
};

// Skin if the mask value is >= 128 (the skin side of a mask is the high /
// nonzero side; mid-grey anti-aliased edges resolve by the 128 threshold),
// flipped when the manifest declares inverted polarity.
inline bool mask_value_is_skin(std::uint8_t v, MaskPolarity polarity) {
  const bool skin = v >= 128;
  return polarity == MaskPolarity::Inverted ? !skin : skin;
}

// Reads every image/mask pair into one labeled pixel pool, in manifest
// order, pixels row-major.
inline PixelPool ingest(const CorpusManifest& m) {
  PixelPool pool;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const ManifestEntry& e = m.entries[i];
    const Image img = read_png_rgb(e.image);
    const GrayImage mask = read_png_gray(e.mask);
    if (img.width != mask.width || img.height != mask.height)
      throw std::invalid_argument("mask dimensions do not match image: " + e.mask);
    if (img.width > 65535 || img.height > 65535)
      throw std::invalid_argument("image too large (>65535 per side): " + e.image);
    ImageRecord rec;
    rec.id = static_cast<std::uint32_t>(i);
    rec.entry = e;
    rec.width = img.width;
    rec.height = img.height;
    rec.first_sample = pool.samples.size();
    for (int row = 0; row < img.height; ++row)
      for (int col = 0; col < img.width; ++col) {
        PixelSample s;
        s.image_id = rec.id;
        s.row = static_cast<std::uint16_t>(row);
        s.col = static_cast<std::uint16_t>(col);
        s.r = img.r(row, col);
        s.g = img.g(row, col);
        s.b = img.b(row, col);
        s.label = mask_value_is_skin(mask.at(row, col), m.polarity) ? 1 : 0;
        pool.samples.push_back(s);
      }
    pool.images.push_back(rec);
  }
  return pool;
}

struct SamplePools {
  std::vector<PixelSample> train;
  std::vector<PixelSample> val;
};

// Uniform sampling without replacement, jointly across both pools: the
// first n_train positions of a seeded partial Fisher-Yates permutation form
// the training sample, the next n_val the validation sample. Disjointness
// holds by construction. Balanced mode draws equal class counts per pool.
inline SamplePools sample_pools(const PixelPool& pool, std::size_t n_train, std::size_t n_val,
                                std::uint64_t seed, bool balanced = false) {
  SamplePools out;
  Rng rng(seed);
  const auto draw = [&](std::vector<std::uint32_t>& idx, std::size_t want_train,
                        std::size_t want_val, const char* what) {
    if (idx.size() < want_train + want_val)
      throw std::invalid_argument(std::string("insufficient pool: need ") +
                                  std::to_string(want_train + want_val) + " " + what +
                                  ", have " + std::to_string(idx.size()));
    // Partial Fisher-Yates: position i swaps with a uniform pick from [i, n).
    const std::size_t need = want_train + want_val;
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < want_train; ++i) out.train.push_back(pool.samples[idx[i]]);
    for (std::size_t i = 0; i < want_val; ++i)
      out.val.push_back(pool.samples[idx[want_train + i]]);
  };

  if (!balanced) {
    std::vector<std::uint32_t> idx(pool.samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    draw(idx, n_train, n_val, "pixels");
  } else {
    if (n_train % 2 || n_val % 2)
      throw std::invalid_argument("balanced sampling needs even pool sizes");
    std::vector<std::uint32_t> skin, nonskin;
    for (std::size_t i = 0; i < pool.samples.size(); ++i)
      (pool.samples[i].label ? skin : nonskin).push_back(static_cast<std::uint32_t>(i));
    // Interleave classes so each pool is exactly half skin.
    SamplePools skin_part, nonskin_part;
    {
      SamplePools tmp;
      std::swap(out, tmp);
      draw(skin, n_train / 2, n_val / 2, "skin pixels");
      std::swap(out, skin_part);
      draw(nonskin, n_train / 2, n_val / 2, "non-skin pixels");
      std::swap(out, nonskin_part);
      std::swap(out, tmp);
    }
    out.train = std::move(skin_part.train);
    out.train.insert(out.train.end(), nonskin_part.train.begin(), nonskin_part.train.end());
    out.val = std::move(skin_part.val);
    out.val.insert(out.val.end(), nonskin_part.val.begin(), nonskin_part.val.end());
  }
  return out;
}

struct DataFile {
  int index = 0;  // 1-based
  std::vector<PixelSample> train;
  std::vector<PixelSample> val;
};

// Contiguous partition into n_files files of per_file samples each, after a
// seeded shuffle of each sample list.
inline std::vector<DataFile> split_files(std::vector<PixelSample> train,
                                         std::vector<PixelSample> val, int n_files,
                                         std::size_t per_file, std::uint64_t seed) {
  if (n_files < 1) throw std::invalid_argument("split_files: n_files must be >= 1");
  const std::size_t expect = static_cast<std::size_t>(n_files) * per_file;
  if (train.size() != expect || val.size() != expect)
    throw std::invalid_argument(
        "split_files: size mismatch, expected " + std::to_string(expect) +
        " training and validation samples, have " + std::to_string(train.size()) + "/" +
        std::to_string(val.size()));
  Rng rng(seed);
  rng.shuffle(train);
  rng.shuffle(val);
  std::vector<DataFile> files(static_cast<std::size_t>(n_files));
  for (int f = 0; f < n_files; ++f) {
    DataFile& df = files[static_cast<std::size_t>(f)];
    df.index = f + 1;
    const std::size_t off = static_cast<std::size_t>(f) * per_file;
    df.train.assign(train.begin() + off, train.begin() + off + per_file);
    df.val.assign(val.begin() + off, val.begin() + off + per_file);
  }
  return files;
}

// Uniform selection of n test images among those not excluded; returns
// manifest image ids in selection order.
inline std::vector<std::uint32_t> select_test_images(const CorpusManifest& m, std::size_t n,
                                                     std::uint64_t seed,
                                                     const std::set<std::uint32_t>& excluded = {}) {
  std::vector<std::uint32_t> eligible;
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (!excluded.count(static_cast<std::uint32_t>(i)))
      eligible.push_back(static_cast<std::uint32_t>(i));
  if (eligible.size() < n)
    throw std::invalid_argument("insufficient images: need " + std::to_string(n) + ", have " +
                                std::to_string(eligible.size()));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(n);
  return eligible;
}

// --- data-file persistence ---------------------------------------------

inline void write_data_file(const DataFile& df, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write data file: " + path.string());
  out << "skindet-datafile\tv1\n";
  out << "index\t" << df.index << "\n";
  out << "train\t" << df.train.size() << "\n";
  out << "val\t" << df.val.size() << "\n";
  out << "# image_id\trow\tcol\tr\tg\tb\tlabel\n";
  const auto emit = [&](const std::vector<PixelSample>& v) {
    for (const PixelSample& s : v)
      out << s.image_id << "\t" << s.row << "\t" << s.col << "\t" << int(s.r) << "\t"
          << int(s.g) << "\t" << int(s.b) << "\t" << int(s.label) << "\n";
  };
  emit(df.train);
  emit(df.val);
}

inline DataFile read_data_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read data file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("skindet-datafile\tv1", 0) != 0)
    throw std::invalid_argument("not a skindet data file: " + path.string());
  DataFile df;
  std::size_t n_train = 0, n_val = 0;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line))
      throw std::invalid_argument("truncated data file header: " + path.string());
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "index")
      ss >> df.index;
    else if (key == "train")
      ss >> n_train;
    else if (key == "val")
      ss >> n_val;
    else
      throw std::invalid_argument("bad data file header line: " + line);
  }
  const auto read_rows = [&](std::vector<PixelSample>& v, std::size_t n) {
    v.reserve(n);
    while (v.size() < n) {
      if (!std::getline(in, line))
        throw std::invalid_argument("truncated data file: " + path.string());
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      PixelSample s;
      unsigned image_id, row, col, r, g, b, label;
      if (!(ss >> image_id >> row >> col >> r >> g >> b >> label))
        throw std::invalid_argument("bad data file row: " + line);
      s.image_id = image_id;
      s.row = static_cast<std::uint16_t>(row);
      s.col = static_cast<std::uint16_t>(col);
      s.r = static_cast<std::uint8_t>(r);
      s.g = static_cast<std::uint8_t>(g);
      s.b = static_cast<std::uint8_t>(b);
      s.label = static_cast<std::uint8_t>(label);
      v.push_back(s);
    }
  };
  read_rows(df.train, n_train);
  read_rows(df.val, n_val);
  return df;
}

// Pixel list -> normalized feature dataset for the given kinds.
inline Dataset dataset_from_pixels(const std::vector<PixelSample>& pixels,
                                   const std::vector<FeatureKind>& kinds) {
  if (kinds.empty()) throw std::invalid_argument("dataset_from_pixels: no feature kinds");
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(pixels.size()),
                  static_cast<Eigen::Index>(kinds.size()));
  d.targets.resize(static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const PixelSample& s = pixels[i];
    const std::vector<double> f = features_from_rgb(s.r, s.g, s.b, kinds);
    for (std::size_t c = 0; c < kinds.size(); ++c)
      d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = f[c];
    d.targets(static_cast<Eigen::Index>(i)) = s.label ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace skindet
