#include "ncsched/schedule_graph.h"

#include <bit>
#include <cctype>
#include <cmath>
#include <limits>

#include "ncsched/errors.h"

namespace ncsched {

namespace {

void check_plant(int plant) {
  if (plant < 1 || plant > kMaxPlants) {
    throw ValidationError("plant id " + std::to_string(plant) +
                          " outside 1.." + std::to_string(kMaxPlants));
  }
}

std::uint64_t bit(int plant) { return std::uint64_t{1} << (plant - 1); }

void check_capacity(int num_plants, int capacity) {
  if (num_plants > kMaxPlants) {
    throw ValidationError("at most 64 plants are supported");
  }
  if (!(capacity > 0 && capacity < num_plants)) {
    throw ValidationError("capacity must satisfy 0 < M < N");
  }
}

void check_certificates(Vertex v, std::span<const CertificateScalars> certs) {
  if (certs.size() < static_cast<std::size_t>(kMaxPlants) &&
      (v.mask() >> certs.size()) != 0) {
    throw ValidationError("missing certificate for a plant of " + v.to_string());
  }
}

}  // namespace

ActiveSet ActiveSet::of(std::span<const int> plants) {
  std::uint64_t mask = 0;
  for (int p : plants) {
    check_plant(p);
    mask |= bit(p);
  }
  return ActiveSet(mask);
}

ActiveSet ActiveSet::of(std::initializer_list<int> plants) {
  return of(std::span<const int>(plants.begin(), plants.size()));
}

ActiveSet ActiveSet::parse(std::string_view text) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
  };
  auto fail = [&]() -> ActiveSet {
    throw ValidationError("malformed active set '" + std::string(text) + "'");
  };
  skip();
  if (i >= text.size() || text[i] != '{') return fail();
  ++i;
  std::uint64_t mask = 0;
  skip();
  if (i < text.size() && text[i] == '}') {
    ++i;
  } else {
    while (true) {
      skip();
      int value = 0;
      bool digits = false;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        value = value * 10 + (text[i] - '0');
        if (value > kMaxPlants) return fail();
        digits = true;
        ++i;
      }
      if (!digits) return fail();
      check_plant(value);
      mask |= bit(value);
      skip();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == '}') {
        ++i;
        break;
      }
      return fail();
    }
  }
  skip();
  if (i != text.size()) return fail();
  return ActiveSet(mask);
}

bool ActiveSet::contains(int plant) const {
  return plant >= 1 && plant <= kMaxPlants && (mask_ & bit(plant)) != 0;
}

int ActiveSet::size() const { return std::popcount(mask_); }

std::vector<int> ActiveSet::plants() const {
  std::vector<int> out;
  std::uint64_t m = mask_;
  while (m != 0) {
    out.push_back(std::countr_zero(m) + 1);
    m &= m - 1;
  }
  return out;
}

std::string ActiveSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for (int p : plants()) {
    if (!first) out += ',';
    out += std::to_string(p);
    first = false;
  }
  return out + "}";
}

ActiveSet ActiveSet::with(int plant) const {
  check_plant(plant);
  return ActiveSet(mask_ | bit(plant));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

VertexRange::VertexRange(int num_plants, int capacity)
    : num_plants_(num_plants), capacity_(capacity) {
  check_capacity(num_plants, capacity);
}

VertexRange::iterator VertexRange::begin() const {
  const std::uint64_t first = (std::uint64_t{1} << capacity_) - 1;
  const std::uint64_t limit =
      num_plants_ == 64 ? 0 : (std::uint64_t{1} << num_plants_);
  return iterator(first, limit);
}

VertexRange::iterator& VertexRange::iterator::operator++() {
  // Gosper's hack: next larger integer with the same popcount.
  const std::uint64_t c = mask_ & (~mask_ + 1);
  const std::uint64_t r = mask_ + c;
  if (r == 0) {  // overflowed past bit 63
    mask_ = 0;
    return *this;
  }
  const std::uint64_t next = (((r ^ mask_) >> 2) / c) | r;
  mask_ = (limit_ != 0 && next >= limit_) ? 0 : next;
  return *this;
}

std::vector<Vertex> enumerate_vertices(int num_plants, int capacity) {
  VertexRange range(num_plants, capacity);
  if (range.size() > kMaxMaterializedVertices) {
    throw ValidationError("N choose M exceeds 1e6 vertices; iterate lazily");
  }
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(range.size()));
  for (Vertex v : range) out.push_back(v);
  return out;
}

std::vector<double> vertex_weight(Vertex v,
                                  std::span<const CertificateScalars> certs) {
  check_certificates(v, certs);
  std::vector<double> w(certs.size());
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const int plant = static_cast<int>(i) + 1;
    w[i] = v.contains(plant) ? -certs[i].stable_rate() : certs[i].unstable_rate();
  }
  return w;
}

std::vector<double> edge_weight(Vertex u, Vertex v,
                                std::span<const CertificateScalars> certs) {
  if (u == v) throw ValidationError("no self-loops: u == v");
  check_certificates(u, certs);
  check_certificates(v, certs);
  std::vector<double> w(certs.size(), 0.0);
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const int plant = static_cast<int>(i) + 1;
    const bool in_u = u.contains(plant);
    const bool in_v = v.contains(plant);
    if (in_u && !in_v) w[i] = std::log(certs[i].mu_su);
    if (!in_u && in_v) w[i] = std::log(certs[i].mu_us);
  }
  return w;
}

}  // namespace ncsched
