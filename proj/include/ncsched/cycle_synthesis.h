#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncsched/certificates.h"
#include "ncsched/execution.h"
#include "ncsched/schedule_graph.h"

namespace ncsched {

/// Closed walk v_0 -> ... -> v_{n-1} -> v_0 on the scheduling graph with a
/// positive integer multiplicity (T-factor) per vertex.
struct Cycle {
  std::vector<Vertex> vertices;
  std::vector<long long> t_factors;

  int size() const { return static_cast<int>(vertices.size()); }
  long long t_sum() const;
};

// Throws ValidationError unless n >= 2, sizes match, every T >= 1 and
// consecutive vertices (including v_{n-1} -> v_0) differ.
void validate_cycle(const Cycle& cycle);

/// Disjoint groups covering {1..N}, one group per channel.
struct Partition {
  std::vector<std::vector<int>> groups;
};

// Throws ValidationError unless there are `capacity` nonempty pairwise
// disjoint groups whose union is {1..num_plants}.
void validate_partition(const Partition& partition, int num_plants,
                        int capacity);

std::string to_string(const Partition& partition);

inline constexpr double kContractionMargin = 1e-12;
inline constexpr double kLpMargin = 1e-6;

/// Per-unit-T contribution of vertex v to the contraction functional of
/// `plant`: -|ln lambda_s| + ln mu_su + ln mu_us if active, else
/// (max_burst + 1) ln lambda_u.
double zbar_coefficient(Vertex v, int plant, const CertificateScalars& s,
                        int max_burst);

/// Loss-adjusted contraction functional of `plant` (1-based) over the cycle.
double zbar(const Cycle& cycle, int plant,
            std::span<const CertificateScalars> certs, int max_burst);

struct ContractionResult {
  bool contractive = false;
  std::vector<double> zbar;  // per plant, index = id - 1
  double epsilon = 0.0;      // max over plants
};

/// Contractive iff zbar_i < -kContractionMargin for every plant.
ContractionResult is_contractive(const Cycle& cycle,
                                 std::span<const CertificateScalars> certs,
                                 int max_burst);

enum class TFactorMethod { kLp, kEnum };

struct TFactorOptions {
  TFactorMethod method = TFactorMethod::kLp;
  // kEnum: search box {1..t_max}^n (default 10 when unset).
  // kLp: when set, restricts to the same box and branches on fractional
  // components, so the answer matches enumeration exactly.
  std::optional<long long> t_max;
  double margin = kLpMargin;
  Execution exec = Execution::kParallel;
};

struct TFactorResult {
  bool feasible = false;
  std::vector<long long> t_factors;
  std::string reason;
  long long nodes = 0;  // LP solves or enumerated vectors
};

/// Finds positive integer T-factors making zbar_i < 0 for every plant in
/// `plants` (all plants when empty) along the vertex sequence.
/// Throws ValidationError for n < 2 or when enumeration would exceed 1e9
/// vectors.
TFactorResult solve_t_factors(std::span<const Vertex> vertices,
                              std::span<const int> plants,
                              std::span<const CertificateScalars> certs,
                              int max_burst, const TFactorOptions& options = {});

inline TFactorResult solve_t_factors(std::span<const Vertex> vertices,
                                     std::span<const CertificateScalars> certs,
                                     int max_burst,
                                     const TFactorOptions& options = {}) {
  return solve_t_factors(vertices, {}, certs, max_burst, options);
}

/// Capacity-one cycle on a group: the k-th vertex activates only plants[k].
/// A single-plant group is a one-vertex pseudo-cycle that only the composer
/// accepts.
struct PartitionCycle {
  std::vector<int> plants;
  std::vector<long long> t_factors;

  long long t_sum() const;
  Cycle as_cycle() const;  // requires at least two plants
};

/// The only candidate contractive cycle on a capacity-one group, with
/// T-factors from solve_t_factors. Empty when infeasible.
std::optional<PartitionCycle> round_robin_cycle(
    std::span<const int> group, std::span<const CertificateScalars> certs,
    int max_burst, const TFactorOptions& options = {});

struct PlantMargin {
  int plant = 0;
  int group_size = 0;
  double lhs = 0.0;  // |ln lambda_s| - (ln mu_su + ln mu_us)
  double rhs = 0.0;  // (group_size - 1)(ell + 1) ln lambda_u

  bool holds() const { return lhs - rhs > 0.0; }
};

struct UniformSufficiency {
  std::vector<PlantMargin> margins;  // in partition order
  bool holds = false;
};

/// Uniform-T sufficient condition evaluated per plant of each group.
UniformSufficiency check_uniform_sufficiency(
    const Partition& partition, std::span<const CertificateScalars> certs,
    int max_burst);

struct GlobalSufficiency {
  // ceil(N/M) group size.
  std::vector<PlantMargin> balanced;
  bool balanced_holds = false;
  // Group size 2, meaningful only when M >= N/2.
  bool half_capacity_applicable = false;
  std::vector<PlantMargin> half_capacity;
  bool half_capacity_holds = false;
  // Group size N, independent of M.
  std::vector<PlantMargin> any_capacity;
  bool any_capacity_holds = false;
};

GlobalSufficiency check_global_sufficiency(
    std::span<const CertificateScalars> certs, int num_plants, int capacity,
    int max_burst);

/// First-fit placement by tolerable group size s_i = ceil(budget_i)
/// (the largest size with size - 1 < budget). Plants sorted by s_i ascending
/// (ties by id) go to the first of M groups where every member still
/// tolerates the grown size. Empty groups are then filled from the largest
/// groups. Empty when some plant fits nowhere.
std::optional<Partition> partition_plants(
    std::span<const CertificateScalars> certs, int num_plants, int capacity,
    int max_burst);

struct Composition {
  Cycle cycle;
  long long period_units = 0;     // K = lcm of the group T sums
  std::vector<long long> scales;  // a_j = K / sum_k T^j
  ContractionResult contraction;
  double identity_error = 0.0;    // max |zbar_i(c) - a_j zbar_i(c_j)|
};

/// Builds the N x K label matrix implied by the group cycles, merges runs of
/// equal consecutive columns (wrapping the last run into the first) and
/// checks contraction plus the per-plant scaling identity. Throws
/// NumericalError if either check fails.
Composition compose_partition_cycles(std::span<const PartitionCycle> cycles,
                                     std::span<const CertificateScalars> certs,
                                     int max_burst);

struct DirectSearchLimits {
  int max_length = 12;
  int max_candidates = 2000;
};

/// Bounded direct search: round-robin candidates over plant orderings (block
/// and sliding windows of M consecutive plants), each passed to the LP.
std::optional<Cycle> direct_cycle_search(
    std::span<const CertificateScalars> certs, int capacity, int max_burst,
    const TFactorOptions& options = {}, const DirectSearchLimits& limits = {});

enum class SynthesisMode { kAutoPartition, kGivenPartition, kDirectCycle };

std::string to_string(SynthesisMode mode);
SynthesisMode parse_synthesis_mode(const std::string& text);

struct SynthesisReport {
  Cycle cycle;
  ContractionResult contraction;
  std::string route;  // "partition" or "direct"
  std::optional<Partition> partition;
  std::optional<UniformSufficiency> uniform;
  GlobalSufficiency global;
  std::vector<PartitionCycle> partition_cycles;
  std::vector<long long> scales;
  long long period_units = 0;
};

/// Partition -> group cycles -> composition, falling back to the direct
/// search in auto mode. Throws InfeasibleError when nothing contractive is
/// found within bounds.
SynthesisReport synthesize_cycle(std::span<const CertificateScalars> certs,
                                 int capacity, int max_burst,
                                 SynthesisMode mode,
                                 const std::optional<Partition>& given = {},
                                 const TFactorOptions& options = {});

}  // namespace ncsched
