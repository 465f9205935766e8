#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/matrix.hpp"

namespace xsap {

// Pairwise cosine matrix of unit-norm rows: S = E E^T.
inline Matrix similarity_matrix(const Matrix& embeddings) {
  const std::size_t n = embeddings.rows;
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.at(i, i) = dot(embeddings.row(i), embeddings.row(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = dot(embeddings.row(i), embeddings.row(j));
      s.at(i, j) = v;
      s.at(j, i) = v;
    }
  }
  return s;
}

// Euclidean distance between unit vectors with cosine s: d^2 = 2 - 2s.
inline double cosine_to_distance(double s) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * s));
}

// (anchor, positive, negative) indices into a batch.
struct Triplet {
  std::uint32_t anchor = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;

  bool operator==(const Triplet&) const = default;
  auto operator<=>(const Triplet&) const = default;
};

// Dense class ids in first-appearance order.
inline std::vector<std::uint32_t> class_ids(const std::vector<LabelId>& labels) {
  std::vector<std::uint32_t> ids(labels.size());
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = index.find(labels[i].value);
    if (it == index.end())
      it = index.emplace(labels[i].value, static_cast<std::uint32_t>(index.size()))
               .first;
    ids[i] = it->second;
  }
  return ids;
}

// Online hard-triplet mining. Over all (a, p, n) with labels[a] == labels[p],
// a != p, labels[a] != labels[n], keeps the triplet iff
//     d(a, p) + margin >= d(a, n)
// with d the unit-vector Euclidean distance derived from the cosine matrix.
// Output is in lexicographic (a, p, n) order.
inline std::vector<Triplet> mine_triplets(const Matrix& similarities,
                                          const std::vector<LabelId>& labels,
                                          double margin) {
  const std::size_t n = labels.size();
  if (similarities.rows != n || similarities.cols != n)
    throw std::runtime_error("mine_triplets: similarity matrix is " +
                             std::to_string(similarities.rows) + "x" +
                             std::to_string(similarities.cols) + " for " +
                             std::to_string(n) + " labels");
  if (margin < 0) throw std::runtime_error("mine_triplets: margin must be >= 0");

  const auto cls = class_ids(labels);
  const std::uint32_t n_classes =
      cls.empty() ? 0 : *std::max_element(cls.begin(), cls.end()) + 1;
  std::vector<std::vector<std::uint32_t>> members(n_classes);
  for (std::uint32_t i = 0; i < n; ++i) members[cls[i]].push_back(i);

  std::vector<Triplet> out;
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto& same = members[cls[a]];
    if (same.size() < 2 || same.size() == n) continue;
    for (const auto p : same) {
      if (p == a) continue;
      const double d_ap = cosine_to_distance(similarities.at(a, p));
      for (std::uint32_t neg = 0; neg < n; ++neg) {
        if (cls[neg] == cls[a]) continue;
        const double d_an = cosine_to_distance(similarities.at(a, neg));
        if (d_ap + margin >= d_an) out.push_back({a, p, neg});
      }
    }
  }
  return out;
}

// Per-anchor positive/negative index sets collected from mined triplets:
// each triplet (a, p, n) contributes p to positives[a] and n to
// negatives[a]. Sets, so repeats collapse; stored sorted.
struct PairSets {
  std::vector<std::vector<std::uint32_t>> positives;
  std::vector<std::vector<std::uint32_t>> negatives;

  std::size_t size() const { return positives.size(); }
};

inline PairSets collect_pairs(const std::vector<Triplet>& triplets,
                              std::size_t batch_size) {
  PairSets sets;
  sets.positives.resize(batch_size);
  sets.negatives.resize(batch_size);
  for (const auto& t : triplets) {
    if (t.anchor >= batch_size || t.positive >= batch_size ||
        t.negative >= batch_size)
      throw std::runtime_error("collect_pairs: triplet index out of range");
    sets.positives[t.anchor].push_back(t.positive);
    sets.negatives[t.anchor].push_back(t.negative);
  }
  const auto dedup = [](std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : sets.positives) dedup(v);
  for (auto& v : sets.negatives) dedup(v);
  return sets;
}

}  // namespace xsap
