#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace skindet {

// Full-range BT.601 (JFIF) YCbCr, all components in [0,255].
struct Ycbcr {
  double y = 0.0;
  double cb = 128.0;
  double cr = 128.0;
};

// The five chrominance features a classifier can consume.
enum class FeatureKind { Cb, Cr, CbOverCr, CbTimesCr, CbMinusCr };

inline constexpr std::array<FeatureKind, 5> kAllFeatureKinds = {
    FeatureKind::Cb, FeatureKind::Cr, FeatureKind::CbOverCr,
    FeatureKind::CbTimesCr, FeatureKind::CbMinusCr};

inline const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Cb: return "cb";
    case FeatureKind::Cr: return "cr";
    case FeatureKind::CbOverCr: return "cb_over_cr";
    case FeatureKind::CbTimesCr: return "cb_times_cr";
    case FeatureKind::CbMinusCr: return "cb_minus_cr";
  }
  throw std::invalid_argument("feature_kind_name: bad kind");
}

inline FeatureKind parse_feature_kind(const std::string& s) {
  for (FeatureKind k : kAllFeatureKinds)
    if (s == feature_kind_name(k)) return k;
  throw std::invalid_argument("unknown feature kind: " + s);
}

// Full-range BT.601:
//   Y  = 0.299 R + 0.587 G + 0.114 B
//   Cb = 128 - 0.168736 R - 0.331264 G + 0.5 B
//   Cr = 128 + 0.5 R - 0.418688 G - 0.081312 B
// The chroma terms are evaluated in difference form so the grey axis
// (r==g==b) lands on cb=cr=128 exactly, not merely within rounding.
inline Ycbcr rgb_to_ycbcr(double r, double g, double b) {
  const auto clamp255 = [](double v) { return std::clamp(v, 0.0, 255.0); };
  Ycbcr p;
  p.y = clamp255(0.299 * r + 0.587 * g + 0.114 * b);
  p.cb = clamp255(128.0 + 0.5 * (b - g) + 0.168736 * (g - r));
  p.cr = clamp255(128.0 + 0.5 * (r - g) + 0.081312 * (g - b));
  return p;
}

// Raw (un-normalized) feature value. The ratio guards against cr = 0 with
// denominator max(cr, 1), which also bounds it by 255.
inline double extract_feature(const Ycbcr& p, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Cb: return p.cb;
    case FeatureKind::Cr: return p.cr;
    case FeatureKind::CbOverCr: return p.cb / std::max(p.cr, 1.0);
    case FeatureKind::CbTimesCr: return p.cb * p.cr;
    case FeatureKind::CbMinusCr: return p.cb - p.cr;
  }
  throw std::invalid_argument("extract_feature: bad kind");
}

// Affine map of a kind's theoretical range onto [0,1].
struct FeatureRange {
  double offset;  // range minimum
  double scale;   // range width
};

inline FeatureRange feature_range(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Cb: return {0.0, 255.0};
    case FeatureKind::Cr: return {0.0, 255.0};
    case FeatureKind::CbOverCr: return {0.0, 255.0};  // ratio clamped at 255
    case FeatureKind::CbTimesCr: return {0.0, 65025.0};
    case FeatureKind::CbMinusCr: return {-255.0, 510.0};
  }
  throw std::invalid_argument("feature_range: bad kind");
}

inline double normalize_feature(double raw, FeatureKind kind) {
  if (kind == FeatureKind::CbOverCr) raw = std::min(raw, 255.0);
  const FeatureRange r = feature_range(kind);
  return (raw - r.offset) / r.scale;
}

// Pixel -> normalized feature vector for the given kinds.
inline std::vector<double> features_from_rgb(double r, double g, double b,
                                             const std::vector<FeatureKind>& kinds) {
  const Ycbcr p = rgb_to_ycbcr(r, g, b);
  std::vector<double> out(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i)
    out[i] = normalize_feature(extract_feature(p, kinds[i]), kinds[i]);
  return out;
}

}  // namespace skindet
