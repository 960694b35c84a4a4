#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "anigrowth/core.hpp"

namespace anigrowth {

/// Minutia locations of one imprint. Coordinates are pixels in image
/// convention (x right, y down) and are handled as complex numbers x + iy.
class MinutiaPattern {
 public:
  MinutiaPattern() = default;

  explicit MinutiaPattern(std::vector<Complex> points, int finger_id = 0, int impression_id = 0)
      : points_(std::move(points)), finger_id_(finger_id), impression_id_(impression_id) {
    if (points_.empty()) throw InvalidInput("minutia pattern must contain at least one point");
    for (const auto& z : points_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw InvalidInput("minutia coordinates must be finite");
      }
    }
  }

  std::span<const Complex> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Complex& operator[](std::size_t j) const { return points_[j]; }
  int finger_id() const noexcept { return finger_id_; }
  int impression_id() const noexcept { return impression_id_; }
  bool centered() const noexcept { return centered_; }

  Complex mean() const {
    Complex sum{0.0, 0.0};
    for (const auto& z : points_) sum += z;
    return sum / static_cast<double>(points_.size());
  }

  /// Multiplies every point by `factor` (rotation and isotropic scaling about
  /// the origin). Centeredness is preserved.
  MinutiaPattern scaled(Complex factor) const {
    MinutiaPattern out = *this;
    for (auto& z : out.points_) z *= factor;
    return out;
  }

  friend MinutiaPattern center_pattern(const MinutiaPattern& pattern);

 private:
  std::vector<Complex> points_;
  int finger_id_ = 0;
  int impression_id_ = 0;
  bool centered_ = false;
};

/// Subtracts the coordinate-wise mean. Idempotent: a pattern already marked
/// centered is returned unchanged.
inline MinutiaPattern center_pattern(const MinutiaPattern& pattern) {
  if (pattern.size() == 0) throw InvalidInput("cannot center an empty pattern");
  if (pattern.centered_) return pattern;
  MinutiaPattern out = pattern;
  const Complex m = pattern.mean();
  for (auto& z : out.points_) z -= m;
  out.centered_ = true;
  return out;
}

/// Template Z and query Z' with index-wise correspondence z_j <-> z'_j.
struct MatchedPair {
  MinutiaPattern reference;
  MinutiaPattern query;

  MatchedPair() = default;
  MatchedPair(MinutiaPattern ref, MinutiaPattern qry) : reference(std::move(ref)), query(std::move(qry)) {
    if (reference.size() != query.size()) {
      throw InvalidInput("matched patterns must have equal length");
    }
  }

  std::size_t size() const noexcept { return reference.size(); }
  bool centered() const noexcept { return reference.centered() && query.centered(); }
};

inline MatchedPair center_pair(const MatchedPair& pair) {
  return MatchedPair(center_pattern(pair.reference), center_pattern(pair.query));
}

/// Key of a pair within a study: individual p and impression k.
struct PairKey {
  int finger = 0;
  int impression = 0;
  auto operator<=>(const PairKey&) const = default;
};

/// All matched pairs of a study, ordered by (finger, impression).
class StudyDataset {
 public:
  void add(PairKey key, MatchedPair pair) {
    if (!pairs_.emplace(key, std::move(pair)).second) {
      throw InvalidInput("duplicate pair key (" + std::to_string(key.finger) + "," +
                         std::to_string(key.impression) + ")");
    }
  }

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  const MatchedPair& at(PairKey key) const { return pairs_.at(key); }
  bool contains(PairKey key) const { return pairs_.contains(key); }

  std::size_t finger_count() const {
    std::vector<int> fingers;
    for (const auto& [key, _] : pairs_) fingers.push_back(key.finger);
    fingers.erase(std::unique(fingers.begin(), fingers.end()), fingers.end());
    return fingers.size();
  }

 private:
  std::map<PairKey, MatchedPair> pairs_;
};

}  // namespace anigrowth
