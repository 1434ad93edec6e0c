#pragma once

#include <compare>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncsched/certificates.h"

namespace ncsched {

// Bitmask vertices cap the plant count.
inline constexpr int kMaxPlants = 64;
inline constexpr std::uint64_t kMaxMaterializedVertices = 1'000'000;

/// Set of plants holding a channel, one bit per plant (bit i-1 for plant i).
/// Plant i is labelled stable at a vertex iff it is in the set.
class ActiveSet {
 public:
  constexpr ActiveSet() = default;
  constexpr explicit ActiveSet(std::uint64_t mask) : mask_(mask) {}

  static ActiveSet of(std::span<const int> plants);
  static ActiveSet of(std::initializer_list<int> plants);
  /// Parses the rendering "{1,4}" (whitespace tolerated).
  static ActiveSet parse(std::string_view text);

  std::uint64_t mask() const { return mask_; }
  bool contains(int plant) const;
  int size() const;
  bool empty() const { return mask_ == 0; }
  /// Ascending plant ids.
  std::vector<int> plants() const;
  /// "{1,4}"
  std::string to_string() const;

  ActiveSet with(int plant) const;

  friend constexpr auto operator<=>(ActiveSet, ActiveSet) = default;

 private:
  std::uint64_t mask_ = 0;
};

using Vertex = ActiveSet;

/// N choose K, saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

/// Lazy enumeration of all size-M subsets of {1..N} in ascending bitmask
/// order (Gosper's hack).
class VertexRange {
 public:
  VertexRange(int num_plants, int capacity);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Vertex;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(std::uint64_t mask, std::uint64_t limit)
        : mask_(mask), limit_(limit) {}

    Vertex operator*() const { return Vertex(mask_); }
    iterator& operator++();
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator& other) const {
      return done() == other.done() && (done() || mask_ == other.mask_);
    }

   private:
    bool done() const { return mask_ == 0; }
    std::uint64_t mask_ = 0;
    std::uint64_t limit_ = 0;  // first mask beyond the universe
  };

  iterator begin() const;
  iterator end() const { return iterator(); }
  std::uint64_t size() const { return binomial(num_plants_, capacity_); }

 private:
  int num_plants_;
  int capacity_;
};

/// Materialized vertex list; refuses more than kMaxMaterializedVertices
/// (use VertexRange instead). Throws ValidationError unless 0 < M < N <= 64.
std::vector<Vertex> enumerate_vertices(int num_plants, int capacity);

/// Entry i: -|ln lambda_s| if plant i is active at v, +|ln lambda_u| otherwise.
std::vector<double> vertex_weight(Vertex v,
                                  std::span<const CertificateScalars> certs);

/// Entry i: ln mu_su when plant i leaves the active set along (u, v), ln mu_us
/// when it enters, 0 otherwise. Throws ValidationError for u == v.
std::vector<double> edge_weight(Vertex u, Vertex v,
                                std::span<const CertificateScalars> certs);

}  // namespace ncsched
