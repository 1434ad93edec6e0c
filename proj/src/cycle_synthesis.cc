#include "ncsched/cycle_synthesis.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "ncsched/errors.h"

namespace ncsched {

namespace {

constexpr double kIdentityTolerance = 1e-9;

std::string margins_text(const std::vector<PlantMargin>& margins) {
  std::ostringstream os;
  for (const auto& m : margins) {
    os << " plant " << m.plant << ": " << m.lhs << " vs " << m.rhs
       << (m.holds() ? " ok;" : " FAIL;");
  }
  return os.str();
}

PlantMargin margin_for(int plant, int group_size,
                       const CertificateScalars& s, int max_burst) {
  PlantMargin m;
  m.plant = plant;
  m.group_size = group_size;
  m.lhs = s.stable_rate() - s.switch_cost();
  m.rhs = (group_size - 1) * (max_burst + 1) * std::log(s.lambda_u);
  return m;
}

std::vector<PlantMargin> margins_at_size(
    std::span<const CertificateScalars> certs, int group_size, int max_burst,
    bool& all_hold) {
  std::vector<PlantMargin> out;
  all_hold = true;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    out.push_back(margin_for(static_cast<int>(i) + 1, group_size, certs[i],
                             max_burst));
    all_hold = all_hold && out.back().holds();
  }
  return out;
}

Cycle merge_columns(const std::vector<Vertex>& columns) {
  Cycle cycle;
  for (Vertex col : columns) {
    if (!cycle.vertices.empty() && cycle.vertices.back() == col) {
      ++cycle.t_factors.back();
    } else {
      cycle.vertices.push_back(col);
      cycle.t_factors.push_back(1);
    }
  }
  if (cycle.vertices.size() > 1 && cycle.vertices.front() == cycle.vertices.back()) {
    cycle.t_factors.front() += cycle.t_factors.back();
    cycle.vertices.pop_back();
    cycle.t_factors.pop_back();
  }
  return cycle;
}

// Vertex sequences of one plant ordering: blocks of `capacity` consecutive
// plants, and all cyclic windows of `capacity` consecutive plants.
std::vector<std::vector<Vertex>> orderings_to_candidates(
    const std::vector<int>& order, int capacity) {
  const int n = static_cast<int>(order.size());
  auto window = [&](int start) {
    std::vector<int> members;
    for (int k = 0; k < capacity; ++k) members.push_back(order[static_cast<std::size_t>((start + k) % n)]);
    return ActiveSet::of(members);
  };
  auto dedup = [](std::vector<Vertex> seq) {
    std::vector<Vertex> out;
    for (Vertex v : seq) {
      if (out.empty() || out.back() != v) out.push_back(v);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
  };
  std::vector<Vertex> block;
  const int blocks = (n + capacity - 1) / capacity;
  for (int b = 0; b < blocks; ++b) block.push_back(window(b * capacity));
  std::vector<Vertex> sliding;
  for (int s = 0; s < n; ++s) sliding.push_back(window(s));
  return {dedup(std::move(block)), dedup(std::move(sliding))};
}

}  // namespace

long long Cycle::t_sum() const {
  return std::accumulate(t_factors.begin(), t_factors.end(), 0LL);
}

void validate_cycle(const Cycle& cycle) {
  if (cycle.vertices.size() < 2) {
    throw ValidationError("a cycle needs at least two vertices");
  }
  if (cycle.vertices.size() != cycle.t_factors.size()) {
    throw ValidationError("cycle has " + std::to_string(cycle.vertices.size()) +
                          " vertices but " +
                          std::to_string(cycle.t_factors.size()) + " T-factors");
  }
  for (long long t : cycle.t_factors) {
    if (t < 1) throw ValidationError("T-factors must be positive integers");
  }
  for (std::size_t k = 0; k < cycle.vertices.size(); ++k) {
    const Vertex next = cycle.vertices[(k + 1) % cycle.vertices.size()];
    if (cycle.vertices[k] == next) {
      throw ValidationError("consecutive cycle vertices must differ, got " +
                            next.to_string() + " twice");
    }
  }
}

void validate_partition(const Partition& partition, int num_plants,
                        int capacity) {
  if (static_cast<int>(partition.groups.size()) != capacity) {
    throw ValidationError("partition needs exactly " + std::to_string(capacity) +
                          " groups, got " +
                          std::to_string(partition.groups.size()));
  }
  std::set<int> seen;
  for (const auto& group : partition.groups) {
    if (group.empty()) throw ValidationError("partition groups must be nonempty");
    for (int p : group) {
      if (p < 1 || p > num_plants) {
        throw ValidationError("partition references unknown plant " +
                              std::to_string(p));
      }
      if (!seen.insert(p).second) {
        throw ValidationError("plant " + std::to_string(p) +
                              " appears in more than one group");
      }
    }
  }
  if (static_cast<int>(seen.size()) != num_plants) {
    throw ValidationError("partition does not cover every plant");
  }
}

std::string to_string(const Partition& partition) {
  std::string out;
  for (std::size_t j = 0; j < partition.groups.size(); ++j) {
    if (j > 0) out += ' ';
    out += ActiveSet::of(partition.groups[j]).to_string();
  }
  return out;
}

double zbar_coefficient(Vertex v, int plant, const CertificateScalars& s,
                        int max_burst) {
  if (v.contains(plant)) return -s.stable_rate() + s.switch_cost();
  return (max_burst + 1) * std::log(s.lambda_u);
}

double zbar(const Cycle& cycle, int plant,
            std::span<const CertificateScalars> certs, int max_burst) {
  if (plant < 1 || plant > static_cast<int>(certs.size())) {
    throw ValidationError("missing certificate for plant " + std::to_string(plant));
  }
  const auto& s = certs[static_cast<std::size_t>(plant - 1)];
  double z = 0.0;
  for (std::size_t k = 0; k < cycle.vertices.size(); ++k) {
    z += static_cast<double>(cycle.t_factors[k]) *
         zbar_coefficient(cycle.vertices[k], plant, s, max_burst);
  }
  return z;
}

ContractionResult is_contractive(const Cycle& cycle,
                                 std::span<const CertificateScalars> certs,
                                 int max_burst) {
  ContractionResult out;
  out.epsilon = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= static_cast<int>(certs.size()); ++i) {
    out.zbar.push_back(zbar(cycle, i, certs, max_burst));
    out.epsilon = std::max(out.epsilon, out.zbar.back());
  }
  out.contractive = !certs.empty() && out.epsilon < -kContractionMargin;
  return out;
}

long long PartitionCycle::t_sum() const {
  return std::accumulate(t_factors.begin(), t_factors.end(), 0LL);
}

Cycle PartitionCycle::as_cycle() const {
  if (plants.size() < 2) {
    throw ValidationError("a single-plant group has no cycle of its own");
  }
  Cycle c;
  for (int p : plants) c.vertices.push_back(ActiveSet::of({p}));
  c.t_factors = t_factors;
  return c;
}

std::optional<PartitionCycle> round_robin_cycle(
    std::span<const int> group, std::span<const CertificateScalars> certs,
    int max_burst, const TFactorOptions& options) {
  if (group.empty()) throw ValidationError("empty plant group");
  for (int p : group) {
    if (p < 1 || p > static_cast<int>(certs.size())) {
      throw ValidationError("missing certificate for plant " + std::to_string(p));
    }
  }
  PartitionCycle out;
  out.plants.assign(group.begin(), group.end());
  if (group.size() == 1) {
    const auto& s = certs[static_cast<std::size_t>(group[0] - 1)];
    if (!(s.stable_rate() - s.switch_cost() > kContractionMargin)) {
      return std::nullopt;
    }
    out.t_factors = {1};
    return out;
  }
  std::vector<Vertex> vertices;
  for (int p : group) vertices.push_back(ActiveSet::of({p}));
  TFactorResult r = solve_t_factors(vertices, group, certs, max_burst, options);
  if (!r.feasible) return std::nullopt;
  out.t_factors = std::move(r.t_factors);
  return out;
}

UniformSufficiency check_uniform_sufficiency(
    const Partition& partition, std::span<const CertificateScalars> certs,
    int max_burst) {
  UniformSufficiency out;
  out.holds = true;
  for (const auto& group : partition.groups) {
    for (int p : group) {
      if (p < 1 || p > static_cast<int>(certs.size())) {
        throw ValidationError("missing certificate for plant " + std::to_string(p));
      }
      out.margins.push_back(margin_for(p, static_cast<int>(group.size()),
                                       certs[static_cast<std::size_t>(p - 1)],
                                       max_burst));
      out.holds = out.holds && out.margins.back().holds();
    }
  }
  return out;
}

GlobalSufficiency check_global_sufficiency(
    std::span<const CertificateScalars> certs, int num_plants, int capacity,
    int max_burst) {
  if (!(capacity > 0 && capacity < num_plants)) {
    throw ValidationError("capacity must satisfy 0 < M < N");
  }
  GlobalSufficiency out;
  const int balanced = (num_plants + capacity - 1) / capacity;
  out.balanced = margins_at_size(certs, balanced, max_burst, out.balanced_holds);
  out.half_capacity_applicable = 2 * capacity >= num_plants;
  if (out.half_capacity_applicable) {
    out.half_capacity =
        margins_at_size(certs, 2, max_burst, out.half_capacity_holds);
  }
  out.any_capacity =
      margins_at_size(certs, num_plants, max_burst, out.any_capacity_holds);
  return out;
}

std::optional<Partition> partition_plants(
    std::span<const CertificateScalars> certs, int num_plants, int capacity,
    int max_burst) {
  if (!(capacity > 0 && capacity < num_plants) ||
      static_cast<int>(certs.size()) != num_plants) {
    throw ValidationError("partition_plants: need N certificates and 0 < M < N");
  }
  std::vector<long long> tolerance(static_cast<std::size_t>(num_plants));
  for (int i = 0; i < num_plants; ++i) {
    const double beta = loss_aware_budget(certs[static_cast<std::size_t>(i)], max_burst);
    double s = std::isfinite(beta) ? std::ceil(beta) : 0.0;
    s = std::clamp(s, 0.0, static_cast<double>(num_plants));
    tolerance[static_cast<std::size_t>(i)] = static_cast<long long>(s);
  }
  std::vector<int> order(static_cast<std::size_t>(num_plants));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return tolerance[static_cast<std::size_t>(a - 1)] <
           tolerance[static_cast<std::size_t>(b - 1)];
  });

  std::vector<std::vector<int>> bins(static_cast<std::size_t>(capacity));
  std::vector<long long> bin_limit(static_cast<std::size_t>(capacity),
                                   std::numeric_limits<long long>::max());
  for (int p : order) {
    const long long s = tolerance[static_cast<std::size_t>(p - 1)];
    bool placed = false;
    for (std::size_t b = 0; b < bins.size() && !placed; ++b) {
      const long long grown = static_cast<long long>(bins[b].size()) + 1;
      if (grown <= s && grown <= bin_limit[b]) {
        bins[b].push_back(p);
        bin_limit[b] = std::min(bin_limit[b], s);
        placed = true;
      }
    }
    if (!placed) return std::nullopt;
  }
  for (auto& bin : bins) {
    if (!bin.empty()) continue;
    auto largest = std::max_element(
        bins.begin(), bins.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    bin.push_back(largest->back());
    largest->pop_back();
  }
  for (auto& bin : bins) std::sort(bin.begin(), bin.end());
  std::sort(bins.begin(), bins.end());
  return Partition{std::move(bins)};
}

Composition compose_partition_cycles(std::span<const PartitionCycle> cycles,
                                     std::span<const CertificateScalars> certs,
                                     int max_burst) {
  if (cycles.empty()) throw ValidationError("no partition cycles to compose");
  Composition out;
  long long period = 1;
  for (const auto& c : cycles) {
    if (c.plants.empty() || c.plants.size() != c.t_factors.size()) {
      throw ValidationError("malformed partition cycle");
    }
    const long long sum = c.t_sum();
    if (sum < 1) throw ValidationError("T-factors must be positive integers");
    period = std::lcm(period, sum);
    if (period > (1LL << 40)) {
      throw ValidationError("composed period is too long");
    }
  }
  out.period_units = period;

  // Column t of the label matrix is the set of plants holding a channel.
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(period), 0);
  for (const auto& c : cycles) {
    const long long a = period / c.t_sum();
    out.scales.push_back(a);
    long long col = 0;
    for (std::size_t k = 0; k < c.plants.size(); ++k) {
      const std::uint64_t bit = ActiveSet::of({c.plants[k]}).mask();
      for (long long r = 0; r < a * c.t_factors[k]; ++r) {
        masks[static_cast<std::size_t>(col++)] |= bit;
      }
    }
  }
  std::vector<Vertex> columns;
  columns.reserve(masks.size());
  for (auto m : masks) columns.emplace_back(m);
  out.cycle = merge_columns(columns);
  if (out.cycle.vertices.size() < 2) {
    throw NumericalError("composition collapsed to a single vertex");
  }
  out.contraction = is_contractive(out.cycle, certs, max_burst);

  for (std::size_t j = 0; j < cycles.size(); ++j) {
    const auto& c = cycles[j];
    for (std::size_t k = 0; k < c.plants.size(); ++k) {
      const int plant = c.plants[k];
      const auto& s = certs[static_cast<std::size_t>(plant - 1)];
      const double active = -s.stable_rate() + s.switch_cost();
      const double idle = (max_burst + 1) * std::log(s.lambda_u);
      const double own = static_cast<double>(c.t_factors[k]) * active +
                         static_cast<double>(c.t_sum() - c.t_factors[k]) * idle;
      const double scaled = static_cast<double>(out.scales[j]) * own;
      const double got = out.contraction.zbar[static_cast<std::size_t>(plant - 1)];
      const double err = std::abs(got - scaled) / std::max(1.0, std::abs(scaled));
      out.identity_error = std::max(out.identity_error, err);
    }
  }
  if (out.identity_error > kIdentityTolerance) {
    throw NumericalError("composition identity violated (error " +
                         std::to_string(out.identity_error) + ")");
  }
  if (!out.contraction.contractive) {
    throw NumericalError("composed cycle is not contractive (epsilon " +
                         std::to_string(out.contraction.epsilon) + ")");
  }
  return out;
}

std::optional<Cycle> direct_cycle_search(
    std::span<const CertificateScalars> certs, int capacity, int max_burst,
    const TFactorOptions& options, const DirectSearchLimits& limits) {
  const int n = static_cast<int>(certs.size());
  if (!(capacity > 0 && capacity < n)) {
    throw ValidationError("capacity must satisfy 0 < M < N");
  }
  const int max_length = static_cast<int>(std::min<std::uint64_t>(
      binomial(n, capacity), static_cast<std::uint64_t>(limits.max_length)));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 1);
  std::set<std::vector<std::uint64_t>> tried;
  int examined = 0;
  do {
    for (auto& seq : orderings_to_candidates(order, capacity)) {
      if (seq.size() < 2 || static_cast<int>(seq.size()) > max_length) continue;
      std::vector<std::uint64_t> key;
      for (Vertex v : seq) key.push_back(v.mask());
      if (!tried.insert(key).second) continue;
      if (examined++ >= limits.max_candidates) return std::nullopt;
      TFactorResult r = solve_t_factors(seq, certs, max_burst, options);
      if (r.feasible) {
        Cycle c{std::move(seq), std::move(r.t_factors)};
        if (is_contractive(c, certs, max_burst).contractive) return c;
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return std::nullopt;
}

std::string to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::kAutoPartition: return "auto-partition";
    case SynthesisMode::kGivenPartition: return "given-partition";
    case SynthesisMode::kDirectCycle: return "direct-cycle";
  }
  return "unknown";
}

SynthesisMode parse_synthesis_mode(const std::string& text) {
  if (text == "auto-partition") return SynthesisMode::kAutoPartition;
  if (text == "given-partition") return SynthesisMode::kGivenPartition;
  if (text == "direct-cycle") return SynthesisMode::kDirectCycle;
  throw ValidationError("unknown synthesis mode '" + text +
                        "' (expected auto-partition, given-partition, "
                        "direct-cycle)");
}

SynthesisReport synthesize_cycle(std::span<const CertificateScalars> certs,
                                 int capacity, int max_burst,
                                 SynthesisMode mode,
                                 const std::optional<Partition>& given,
                                 const TFactorOptions& options) {
  const int n = static_cast<int>(certs.size());
  SynthesisReport report;
  report.global = check_global_sufficiency(certs, n, capacity, max_burst);

  std::string partition_failure;
  auto try_partition = [&](const Partition& partition) -> bool {
    report.partition = partition;
    report.uniform = check_uniform_sufficiency(partition, certs, max_burst);
    std::vector<PartitionCycle> cycles;
    for (const auto& group : partition.groups) {
      auto rr = round_robin_cycle(group, certs, max_burst, options);
      if (!rr) {
        partition_failure = "group " + ActiveSet::of(group).to_string() +
                            " has no contractive round-robin cycle;" +
                            margins_text(report.uniform->margins);
        return false;
      }
      cycles.push_back(std::move(*rr));
    }
    Composition comp = compose_partition_cycles(cycles, certs, max_burst);
    report.cycle = std::move(comp.cycle);
    report.contraction = std::move(comp.contraction);
    report.partition_cycles = std::move(cycles);
    report.scales = std::move(comp.scales);
    report.period_units = comp.period_units;
    report.route = "partition";
    return true;
  };

  if (mode == SynthesisMode::kGivenPartition) {
    if (!given) throw ValidationError("given-partition mode needs a partition");
    validate_partition(*given, n, capacity);
    if (!try_partition(*given)) throw InfeasibleError(partition_failure);
    return report;
  }
  if (mode == SynthesisMode::kAutoPartition) {
    if (auto p = partition_plants(certs, n, capacity, max_burst)) {
      if (try_partition(*p)) return report;
    } else {
      partition_failure = "no partition satisfies the per-plant group-size "
                          "budgets;" + margins_text(report.global.balanced);
    }
    report.partition.reset();
    report.uniform.reset();
  }
  TFactorOptions direct_options = options;
  direct_options.t_max.reset();
  direct_options.method = TFactorMethod::kLp;
  if (auto c = direct_cycle_search(certs, capacity, max_burst, direct_options)) {
    report.contraction = is_contractive(*c, certs, max_burst);
    report.cycle = std::move(*c);
    report.route = "direct";
    return report;
  }
  std::string msg = "no contractive cycle found within search bounds";
  if (!partition_failure.empty()) msg += "; " + partition_failure;
  throw InfeasibleError(msg);
}

}  // namespace ncsched
