#pragma once

#include "geoknot/geometry.hpp"
#include "geoknot/lattice.hpp"
#include "geoknot/rng.hpp"
#include "geoknot/topology.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geoknot {

enum class BiasKind { Writhe, Acn, Entanglement, None };
std::string_view to_string(BiasKind k);
BiasKind parse_bias_kind(std::string_view s);

/// Flat histogram (Wang-Landau) or a hard window with fixed weights.
enum class BiasMode { FlatHistogram, Window };
/// What happens to values outside the bin range.
enum class RangePolicy { Reject, Extend };

/// Equal-width bins over [lo, hi).
struct BinSpec {
    double lo = -10;
    double hi = 10;
    std::size_t count = 40;

    /// Parses "LO:HI:COUNT".
    static BinSpec parse(std::string_view text);
    friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

struct BiasSpec {
    BiasKind kind = BiasKind::Writhe;
    BinSpec bins;
    BiasMode mode = BiasMode::FlatHistogram;
    RangePolicy policy = RangePolicy::Reject;
    friend bool operator==(const BiasSpec&, const BiasSpec&) = default;
};

class BiasState {
public:
    static constexpr double kInitialLnF = 1.0;
    static constexpr double kLnFFloor = 1e-3;
    static constexpr double kFlatness = 0.8;

    BiasState() = default;
    /// `total_saves` sets the per-bin quota ceil(total_saves / nbins). The
    /// flatness test only runs once the mean visit count reaches `min_mean_visits`.
    BiasState(const BiasSpec& spec, std::size_t total_saves, double min_mean_visits = 100);

    const BiasSpec& spec() const { return spec_; }
    std::size_t bin_count() const { return visits_.size(); }
    std::vector<double> edges() const;

    /// Bin of a functional value; nullopt when out of range under RangePolicy::Reject.
    std::optional<std::size_t> bin_of(double value) const;

    /// min(1, exp(logw[old] - logw[new])). A move out of range has probability 0;
    /// a move from an out-of-range state is always accepted. Window mode: 1 inside, 0 outside.
    double accept_probability(std::optional<std::size_t> old_bin, std::optional<std::size_t> new_bin) const;

    /// Counts a visit and, in flat-histogram mode, raises logw[bin] by ln f.
    /// A flat histogram halves ln f (not below the floor) and resets the counts;
    /// once flat at the floor the schedule is complete and later visits also
    /// go to the post-schedule histogram.
    void record_visit(std::size_t bin);

    bool should_save(std::optional<std::size_t> bin, std::size_t n, std::size_t target_n) const;
    void commit_save(std::size_t bin);

    double ln_f() const { return ln_f_; }
    bool schedule_complete() const { return complete_; }
    std::size_t halvings() const { return halvings_; }
    const std::vector<std::uint64_t>& visits() const { return visits_; }
    const std::vector<std::uint64_t>& total_visits() const { return total_visits_; }
    const std::vector<std::uint64_t>& post_schedule_visits() const { return post_visits_; }
    const std::vector<double>& log_weights() const { return logw_; }
    const std::vector<std::size_t>& saved() const { return saved_; }
    std::size_t quota() const { return quota_; }
    std::size_t total_saved() const;
    std::size_t bins_filled() const;

    /// Direct access for tests and restarts.
    void set_log_weights(std::vector<double> logw);

private:
    BiasSpec spec_;
    std::vector<std::uint64_t> visits_;
    std::vector<std::uint64_t> total_visits_;
    std::vector<std::uint64_t> post_visits_;
    std::vector<double> logw_;
    std::vector<std::size_t> saved_;
    std::size_t quota_ = 0;
    double ln_f_ = kInitialLnF;
    double min_mean_visits_ = 100;
    bool complete_ = false;
    std::size_t halvings_ = 0;
};

/// min/mean of a histogram; 0 for an empty one.
double flatness(const std::vector<std::uint64_t>& histogram);

struct ChainConfig {
    KnotClass knot = KnotClass::Unknot;
    std::size_t target_n = 100;
    BiasSpec bias;
    std::uint64_t seed = 1;
    std::uint64_t chain_id = 0;
    std::size_t save_count = 100;
    std::size_t pivot_batch = 10;
    std::size_t bfacf_per_batch = 100;
    std::uint64_t max_moves = 50'000'000;
    double jitter = 0.1;
    /// Upper length bound for BFACF; 0 means target_n.
    std::size_t max_length = 0;
    /// Accepted moves between saves, as a multiple of target_n.
    std::size_t stride_factor = 5;
    std::uint64_t audit_interval = 1000;
    /// Keep running after the quotas fill until the flat-histogram schedule
    /// completes and `post_schedule_sweeps` * nbins post-schedule visits exist.
    bool run_until_converged = false;
    std::size_t post_schedule_sweeps = 0;
    /// Start from the mirror image of the seed.
    bool mirror_seed = false;
    /// Progress line to stderr every this many moves; 0 disables.
    std::uint64_t progress_interval = 0;

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

struct SavedRecord {
    std::size_t id = 0;
    KnotClass label = KnotClass::Unknot;
    PolygonalCurve curve;
    FunctionalVector functionals;
    std::uint64_t seed = 0;
    std::uint64_t chain_id = 0;
    std::uint64_t move_index = 0;
    std::size_t bin = 0;
    /// Biased functional of the lattice state at save time.
    double bias_value = 0;
};

struct ChainStats {
    std::uint64_t moves = 0;
    std::uint64_t accepted = 0;
    std::uint64_t pivot_batches = 0;
    std::uint64_t pivots_accepted = 0;
    std::uint64_t rollbacks = 0;
    std::uint64_t audits = 0;
    std::uint64_t bias_rejections = 0;
};

struct DatasetShard {
    ChainConfig config;
    std::vector<SavedRecord> records;
    ChainStats stats;
    BiasState bias;
    /// Move budget ran out before the quotas filled.
    bool partial = false;
};

/// One Markov chain: BFACF moves with pivot batches, flat-histogram
/// acceptance and topology rollback.
class Chain {
public:
    explicit Chain(const ChainConfig& config);
    /// Starts from a given polygon instead of the shipped seed.
    Chain(const ChainConfig& config, LatticePolygon start);

    /// One BFACF proposal; runs a pivot batch after every `bfacf_per_batch` of them.
    MoveOutcome mc_step();
    /// Checkpoint, `pivot_batch` biased pivot proposals, verify, roll back on mismatch.
    /// Returns true when the batch was kept.
    bool run_pivot_batch();

    const LatticePolygon& polygon() const { return poly_; }
    const CounterRng& rng() const { return rng_; }
    const BiasState& bias() const { return bias_; }
    BiasState& bias() { return bias_; }
    const ChainStats& stats() const { return stats_; }
    const ChainConfig& config() const { return config_; }
    double value() const { return value_; }
    std::optional<std::size_t> bin() const { return bin_; }
    std::uint64_t accepted_since_save() const { return since_save_; }
    void reset_save_stride() { since_save_ = 0; }

    /// Full recomputation of the biased functional for a polygon.
    double evaluate(const LatticePolygon& poly) const;

    /// Called after every rollback with the checkpoint and the restored state
    /// (before the stream is re-split).
    std::function<void(const Checkpoint&, const LatticePolygon&, const CounterRng&)> on_rollback;

private:
    double delta(const BfacfProposal& p) const;
    void visit(std::optional<std::size_t> bin);
    void audit();

    ChainConfig config_;
    LatticePolygon poly_;
    CounterRng rng_;
    BiasState bias_;
    ChainStats stats_;
    double value_ = 0;
    long long tait_ = 0;
    std::optional<std::size_t> bin_;
    std::uint64_t since_save_ = 0;
    std::uint64_t bfacf_moves_ = 0;
    std::vector<std::size_t> pending_visits_;
    bool buffering_ = false;
};

/// Runs one chain to completion. Deterministic given the config.
DatasetShard run_chain(const ChainConfig& config);

/// Splits `config.save_count` over `chains` chains keyed (seed, chain id),
/// runs them on up to `threads` threads and returns the shards in chain order.
std::vector<DatasetShard> run_chains(const ChainConfig& config, std::size_t chains, std::size_t threads = 0);

struct Dataset {
    std::vector<SavedRecord> records;
    std::size_t unknots = 0;
    std::size_t trefoils = 0;
    /// Per-bin saved counts summed over shards.
    std::vector<std::size_t> coverage;
    bool partial = false;
};

/// Concatenates shards in order and renumbers ids 0..n-1. Throws
/// std::invalid_argument when target length or bias spec differ.
Dataset merge_shards(const std::vector<DatasetShard>& shards);

/// Concatenates shards that may use different bias specs (no coverage report).
/// Throws std::invalid_argument when target lengths differ.
Dataset merge_mixture(const std::vector<DatasetShard>& shards);

/// Bin ranges suited to N = 100 for each biased functional.
BinSpec default_bins(BiasKind kind);

/// One bias of a mixed ensemble and its share of the saves.
struct MixtureComponent {
    BiasSpec bias;
    double weight = 1;
};

/// Writhe-biased and entanglement-biased chains in a 0.6 / 0.4 split.
std::vector<MixtureComponent> geoknot_mixture();

/// Splits `total` saves over the components in proportion to their weights.
std::vector<std::size_t> mixture_counts(std::size_t total, const std::vector<MixtureComponent>& components);

/// Runs `chains` chains per component with that component's bias. Chain ids
/// are offset per component so every chain has its own stream.
std::vector<DatasetShard> run_mixture(const ChainConfig& config, const std::vector<MixtureComponent>& components,
                                      std::size_t chains, std::size_t threads = 0);

/// Seed for the jitter of a saved record.
std::uint64_t jitter_seed(std::uint64_t seed, std::uint64_t chain_id, std::uint64_t save_index);

}  // namespace geoknot
