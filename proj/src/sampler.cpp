#include "geoknot/sampler.hpp"

#include "geoknot/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace geoknot {

std::string_view to_string(BiasKind k) {
    switch (k) {
        case BiasKind::Writhe: return "writhe";
        case BiasKind::Acn: return "acn";
        case BiasKind::Entanglement: return "entanglement";
        case BiasKind::None: return "none";
    }
    return "none";
}

BiasKind parse_bias_kind(std::string_view s) {
    if (s == "writhe") return BiasKind::Writhe;
    if (s == "acn") return BiasKind::Acn;
    if (s == "entanglement") return BiasKind::Entanglement;
    if (s == "none") return BiasKind::None;
    throw std::invalid_argument("unknown bias functional: " + std::string(s));
}

BinSpec BinSpec::parse(std::string_view text) {
    const auto c1 = text.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw std::invalid_argument("bins must be LO:HI:COUNT");
    BinSpec b;
    try {
        std::size_t used = 0;
        const std::string lo(text.substr(0, c1)), hi(text.substr(c1 + 1, c2 - c1 - 1)), n(text.substr(c2 + 1));
        b.lo = std::stod(lo, &used);
        if (used != lo.size()) throw std::invalid_argument(lo);
        b.hi = std::stod(hi, &used);
        if (used != hi.size()) throw std::invalid_argument(hi);
        const long long count = std::stoll(n, &used);
        if (used != n.size() || count < 1) throw std::invalid_argument(n);
        b.count = static_cast<std::size_t>(count);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bins must be LO:HI:COUNT, got '" + std::string(text) + "'");
    }
    if (!(b.lo < b.hi)) throw std::invalid_argument("bins need LO < HI");
    return b;
}

// ---------------------------------------------------------------------------
// BiasState

BiasState::BiasState(const BiasSpec& spec, std::size_t total_saves, double min_mean_visits)
    : spec_(spec), min_mean_visits_(min_mean_visits) {
    if (spec_.kind == BiasKind::None) spec_.bins = {-1.0, 1.0, 1};
    if (spec_.bins.count == 0 || !(spec_.bins.lo < spec_.bins.hi)) throw std::invalid_argument("invalid bin spec");
    const std::size_t n = spec_.bins.count;
    visits_.assign(n, 0);
    total_visits_.assign(n, 0);
    post_visits_.assign(n, 0);
    logw_.assign(n, 0.0);
    saved_.assign(n, 0);
    quota_ = std::max<std::size_t>(1, (total_saves + n - 1) / n);
}

std::vector<double> BiasState::edges() const {
    std::vector<double> e(bin_count() + 1);
    const double width = (spec_.bins.hi - spec_.bins.lo) / static_cast<double>(bin_count());
    for (std::size_t k = 0; k <= bin_count(); ++k) e[k] = spec_.bins.lo + width * static_cast<double>(k);
    e.back() = spec_.bins.hi;
    return e;
}

std::optional<std::size_t> BiasState::bin_of(double value) const {
    const auto n = bin_count();
    if (spec_.kind == BiasKind::None) return 0;
    if (!std::isfinite(value)) return std::nullopt;
    const double pos = (value - spec_.bins.lo) / (spec_.bins.hi - spec_.bins.lo) * static_cast<double>(n);
    if (pos < 0 || pos >= static_cast<double>(n)) {
        if (spec_.policy == RangePolicy::Reject) return std::nullopt;
        return pos < 0 ? 0 : n - 1;
    }
    return std::min(static_cast<std::size_t>(pos), n - 1);
}

double BiasState::accept_probability(std::optional<std::size_t> old_bin, std::optional<std::size_t> new_bin) const {
    if (!old_bin) return 1.0;
    if (!new_bin) return 0.0;
    if (spec_.mode == BiasMode::Window) return 1.0;
    return std::min(1.0, std::exp(logw_.at(*old_bin) - logw_.at(*new_bin)));
}

double flatness(const std::vector<std::uint64_t>& h) {
    if (h.empty()) return 0.0;
    const double total = static_cast<double>(std::accumulate(h.begin(), h.end(), std::uint64_t{0}));
    if (total == 0) return 0.0;
    const double mean = total / static_cast<double>(h.size());
    return static_cast<double>(*std::min_element(h.begin(), h.end())) / mean;
}

void BiasState::record_visit(std::size_t bin) {
    ++visits_.at(bin);
    ++total_visits_[bin];
    if (complete_) ++post_visits_[bin];
    if (spec_.mode == BiasMode::Window) return;
    logw_[bin] += ln_f_;
    if (complete_) return;
    const double total = static_cast<double>(std::accumulate(visits_.begin(), visits_.end(), std::uint64_t{0}));
    const double mean = total / static_cast<double>(visits_.size());
    if (mean < min_mean_visits_) return;
    const auto lowest = static_cast<double>(*std::min_element(visits_.begin(), visits_.end()));
    if (lowest < kFlatness * mean) return;
    if (ln_f_ <= kLnFFloor) {
        complete_ = true;
    } else {
        ln_f_ = std::max(ln_f_ / 2, kLnFFloor);
        ++halvings_;
    }
    std::fill(visits_.begin(), visits_.end(), 0);
}

bool BiasState::should_save(std::optional<std::size_t> bin, std::size_t n, std::size_t target_n) const {
    return bin && n == target_n && saved_.at(*bin) < quota_;
}

void BiasState::commit_save(std::size_t bin) {
    if (saved_.at(bin) >= quota_) throw std::logic_error("bin quota already full");
    ++saved_[bin];
}

std::size_t BiasState::total_saved() const { return std::accumulate(saved_.begin(), saved_.end(), std::size_t{0}); }

std::size_t BiasState::bins_filled() const {
    return static_cast<std::size_t>(std::count_if(saved_.begin(), saved_.end(), [&](std::size_t s) { return s >= quota_; }));
}

void BiasState::set_log_weights(std::vector<double> logw) {
    if (logw.size() != logw_.size()) throw std::invalid_argument("log-weight table size mismatch");
    logw_ = std::move(logw);
}

// ---------------------------------------------------------------------------
// ChainConfig

void ChainConfig::validate() const {
    if (knot == KnotClass::Other) throw std::invalid_argument("chain knot class must be 0_1 or 3_1");
    const std::size_t seed_length = knot == KnotClass::Trefoil ? 24 : 4;
    if (target_n % 2 != 0) throw std::invalid_argument("target length must be even");
    if (target_n < seed_length) throw std::invalid_argument("target length below the seed length");
    if (save_count == 0) throw std::invalid_argument("save count must be positive");
    if (max_moves == 0) throw std::invalid_argument("move budget must be positive");
    if (!(jitter >= 0 && jitter < 0.5)) throw std::invalid_argument("jitter must lie in [0, 0.5)");
    if (max_length != 0 && max_length < target_n) throw std::invalid_argument("max length below target length");
    if (bias.bins.count == 0 || !(bias.bins.lo < bias.bins.hi)) throw std::invalid_argument("invalid bin spec");
}

// ---------------------------------------------------------------------------
// Chain

namespace {

LatticePolygon initial_polygon(const ChainConfig& c) {
    LatticePolygon p = load_seed_polygon(c.knot);
    return c.mirror_seed ? p.mirrored() : p;
}

std::vector<LatticeEdge> edges_of(const LatticePolygon& poly) {
    std::vector<LatticeEdge> e(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) e[i] = {poly[i], poly.at_cyclic(static_cast<std::ptrdiff_t>(i) + 1)};
    return e;
}

double abs_pair_acn(const LatticeEdge& a, const LatticeEdge& b) {
    // Both orderings of the pair, normalized as in acn().
    const double omega =
        segment_pair_solid_angle(a.start.cast(), a.end.cast(), b.start.cast(), b.end.cast());
    return 2.0 * std::abs(omega) / (4.0 * std::numbers::pi);
}

double pair_writhe(const LatticeEdge& a, const LatticeEdge& b) { return lattice_edge_pair_tait(a, b) / 4.0; }

// Change of a pair-additive functional when `removed` edges are replaced by `added`.
template <class F>
double pair_delta(const LatticePolygon& poly, const BfacfProposal& p, F f) {
    const auto edges = edges_of(poly);
    double d = 0.0;
    for (const auto& a : p.added) {
        for (const auto& e : edges) d += f(a, e);
        for (const auto& r : p.removed) d -= f(a, r);
    }
    for (const auto& r : p.removed) {
        for (const auto& e : edges) d -= f(r, e);
    }
    for (std::size_t i = 0; i < p.added.size(); ++i) {
        for (std::size_t j = i + 1; j < p.added.size(); ++j) d += f(p.added[i], p.added[j]);
    }
    for (std::size_t i = 0; i < p.removed.size(); ++i) {
        for (std::size_t j = i + 1; j < p.removed.size(); ++j) d += f(p.removed[i], p.removed[j]);
    }
    return d;
}

}  // namespace

Chain::Chain(const ChainConfig& config) : Chain(config, initial_polygon(config)) {}

Chain::Chain(const ChainConfig& config, LatticePolygon start)
    : config_(config),
      poly_(std::move(start)),
      rng_(config.seed, config.chain_id),
      bias_(config.bias, config.save_count) {
    config_.validate();
    value_ = evaluate(poly_);
    bin_ = bias_.bin_of(value_);
}

double Chain::evaluate(const LatticePolygon& poly) const {
    switch (config_.bias.kind) {
        case BiasKind::Writhe: return lattice_writhe(poly);
        case BiasKind::Acn: return acn(writhe_matrix(PolygonalCurve::from_lattice(poly)));
        case BiasKind::Entanglement:
            return static_cast<double>(long_range_entanglement(PolygonalCurve::from_lattice(poly)));
        case BiasKind::None: return 0.0;
    }
    return 0.0;
}

double Chain::delta(const BfacfProposal& p) const {
    switch (config_.bias.kind) {
        case BiasKind::Writhe: return pair_delta(poly_, p, pair_writhe);
        case BiasKind::Acn: return pair_delta(poly_, p, abs_pair_acn);
        case BiasKind::Entanglement: {
            const auto after = PolygonalCurve::unchecked([&] {
                std::vector<Vec3> v;
                for (const auto& q : preview_bfacf(poly_, p)) v.push_back(q.cast());
                return v;
            }());
            return static_cast<double>(long_range_entanglement(after)) - value_;
        }
        case BiasKind::None: return 0.0;
    }
    return 0.0;
}

void Chain::visit(std::optional<std::size_t> bin) {
    if (!bin) return;
    if (buffering_) {
        pending_visits_.push_back(*bin);
        return;
    }
    bias_.record_visit(*bin);
}

void Chain::audit() {
    ++stats_.audits;
    if (verify_knot_class(poly_, config_.knot).verdict != config_.knot)
        throw std::logic_error("BFACF trajectory changed the knot type");
    value_ = evaluate(poly_);
    bin_ = bias_.bin_of(value_);
}

MoveOutcome Chain::mc_step() {
    const std::size_t max_length = config_.max_length ? config_.max_length : config_.target_n;
    auto [kind, proposal] = propose_bfacf(poly_, rng_, max_length);
    ++stats_.moves;
    ++bfacf_moves_;
    MoveOutcome out{false, kind, 0};
    if (proposal) {
        const double next = value_ + delta(*proposal);
        const auto next_bin = bias_.bin_of(next);
        const double p = bias_.accept_probability(bin_, next_bin);
        if (p >= 1.0 || rng_.uniform() < p) {
            apply_bfacf(poly_, *proposal);
            value_ = next;
            bin_ = next_bin;
            ++stats_.accepted;
            ++since_save_;
            out = {true, kind, proposal->delta_length()};
        } else {
            ++stats_.bias_rejections;
        }
    }
    visit(bin_);
    if (config_.audit_interval && bfacf_moves_ % config_.audit_interval == 0) audit();
    if (config_.pivot_batch && config_.bfacf_per_batch && bfacf_moves_ % config_.bfacf_per_batch == 0 &&
        poly_.size() >= 6)
        run_pivot_batch();
    return out;
}

bool Chain::run_pivot_batch() {
    ++stats_.pivot_batches;
    const Checkpoint cp = capture(poly_, rng_);
    const double cp_value = value_;
    const auto cp_bin = bin_;
    const auto cp_since_save = since_save_;
    const auto cp_accepted = stats_.accepted;
    pending_visits_.clear();
    buffering_ = true;
    std::uint64_t kept = 0;
    for (std::size_t k = 0; k < config_.pivot_batch; ++k) {
        LatticePolygon before = poly_;
        ++stats_.moves;
        if (pivot_move(poly_, rng_).accepted) {
            const double next = evaluate(poly_);
            const auto next_bin = bias_.bin_of(next);
            const double p = bias_.accept_probability(bin_, next_bin);
            if (p >= 1.0 || rng_.uniform() < p) {
                value_ = next;
                bin_ = next_bin;
                ++kept;
                ++stats_.accepted;
                ++since_save_;
            } else {
                poly_ = std::move(before);
                ++stats_.bias_rejections;
            }
        }
        visit(bin_);
    }
    buffering_ = false;
    const bool consistent = kept == 0 || verify_knot_class(poly_, config_.knot).verdict == config_.knot;
    if (consistent) {
        stats_.pivots_accepted += kept;
        for (std::size_t b : pending_visits_) bias_.record_visit(b);
        pending_visits_.clear();
        return true;
    }
    const std::size_t batch_visits = pending_visits_.size();
    pending_visits_.clear();
    restore(cp, poly_, rng_);
    value_ = cp_value;
    bin_ = cp_bin;
    since_save_ = cp_since_save;
    stats_.accepted = cp_accepted;
    ++stats_.rollbacks;
    if (on_rollback) on_rollback(cp, poly_, rng_);
    // A fresh substream keeps the chain from replaying the rejected batch.
    rng_ = rng_.split(stats_.rollbacks);
    if (cp_bin) {
        for (std::size_t k = 0; k < batch_visits; ++k) bias_.record_visit(*cp_bin);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Runs

std::uint64_t jitter_seed(std::uint64_t seed, std::uint64_t chain_id, std::uint64_t save_index) {
    return CounterRng::mix(CounterRng::mix(seed ^ CounterRng::mix(chain_id + 1)) + save_index);
}

DatasetShard run_chain(const ChainConfig& config) {
    Chain chain(config);
    DatasetShard shard;
    shard.config = config;
    const std::uint64_t stride = config.stride_factor * config.target_n;
    const std::size_t nbins = chain.bias().bin_count();
    std::uint64_t save_attempts = 0;

    auto finished = [&] {
        if (chain.bias().total_saved() < config.save_count) return false;
        if (!config.run_until_converged) return true;
        if (!chain.bias().schedule_complete()) return false;
        const auto& post = chain.bias().post_schedule_visits();
        const auto total = std::accumulate(post.begin(), post.end(), std::uint64_t{0});
        return total >= config.post_schedule_sweeps * nbins;
    };

    while (!finished()) {
        if (chain.stats().moves >= config.max_moves) break;
        chain.mc_step();
        if (config.progress_interval && chain.stats().moves % config.progress_interval == 0) {
            std::fprintf(stderr, "chain=%llu moves=%llu bins_filled=%zu/%zu lnf=%g\n",
                         static_cast<unsigned long long>(config.chain_id),
                         static_cast<unsigned long long>(chain.stats().moves), chain.bias().bins_filled(), nbins,
                         chain.bias().ln_f());
        }
        if (chain.bias().total_saved() >= config.save_count || chain.accepted_since_save() < stride) continue;
        if (!chain.bias().should_save(chain.bin(), chain.polygon().size(), config.target_n)) continue;

        const std::uint64_t js = jitter_seed(config.seed, config.chain_id, save_attempts++);
        PolygonalCurve curve = quantize(to_offlattice(chain.polygon(), config.jitter, js));
        chain.reset_save_stride();
        if (verify_knot_class(curve, config.knot).verdict != config.knot) continue;
        SavedRecord r;
        r.id = shard.records.size();
        r.label = config.knot;
        r.functionals = functional_vector(curve);
        r.curve = std::move(curve);
        r.seed = config.seed;
        r.chain_id = config.chain_id;
        r.move_index = chain.stats().moves;
        r.bin = *chain.bin();
        r.bias_value = chain.value();
        chain.bias().commit_save(r.bin);
        shard.records.push_back(std::move(r));
    }
    shard.stats = chain.stats();
    shard.bias = chain.bias();
    shard.partial = chain.bias().total_saved() < config.save_count;
    return shard;
}

std::vector<DatasetShard> run_chains(const ChainConfig& config, std::size_t chains, std::size_t threads) {
    if (chains == 0) throw std::invalid_argument("chain count must be positive");
    if (config.save_count < chains) throw std::invalid_argument("fewer saves than chains");
    std::vector<ChainConfig> configs(chains, config);
    for (std::size_t c = 0; c < chains; ++c) {
        configs[c].chain_id = config.chain_id + c;
        configs[c].save_count = config.save_count / chains + (c < config.save_count % chains ? 1 : 0);
    }
    std::vector<DatasetShard> shards(chains);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, chains);
    if (threads <= 1) {
        for (std::size_t c = 0; c < chains; ++c) shards[c] = run_chain(configs[c]);
        return shards;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(chains);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chains; c = next++) {
                try {
                    shards[c] = run_chain(configs[c]);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return shards;
}

namespace {

void append_shards(Dataset& d, const std::vector<DatasetShard>& shards) {
    if (shards.empty()) return;
    const auto& ref = shards.front();
    for (const auto& s : shards) {
        if (s.config.target_n != ref.config.target_n) throw std::invalid_argument("shards differ in target length");
        for (const auto& r : s.records) {
            d.records.push_back(r);
            d.records.back().id = d.records.size() - 1;
            (r.label == KnotClass::Trefoil ? d.trefoils : d.unknots) += 1;
        }
        d.partial = d.partial || s.partial;
    }
}

}  // namespace

Dataset merge_shards(const std::vector<DatasetShard>& shards) {
    Dataset d;
    if (shards.empty()) return d;
    const auto& ref = shards.front();
    d.coverage.assign(ref.bias.bin_count(), 0);
    for (const auto& s : shards) {
        if (!(s.config.bias == ref.config.bias)) throw std::invalid_argument("shards differ in bias spec");
    }
    append_shards(d, shards);
    for (const auto& s : shards) {
        for (std::size_t b = 0; b < s.bias.bin_count(); ++b) d.coverage[b] += s.bias.saved()[b];
    }
    return d;
}

Dataset merge_mixture(const std::vector<DatasetShard>& shards) {
    Dataset d;
    append_shards(d, shards);
    return d;
}

BinSpec default_bins(BiasKind kind) {
    switch (kind) {
        case BiasKind::Writhe: return {-6, 6, 24};
        case BiasKind::Acn: return {14, 32, 18};
        case BiasKind::Entanglement: return {400, 2400, 20};
        case BiasKind::None: return {-1, 1, 1};
    }
    return {-1, 1, 1};
}

std::vector<MixtureComponent> geoknot_mixture() {
    return {{{BiasKind::Writhe, default_bins(BiasKind::Writhe)}, 0.6},
            {{BiasKind::Entanglement, default_bins(BiasKind::Entanglement)}, 0.4}};
}

std::vector<std::size_t> mixture_counts(std::size_t total, const std::vector<MixtureComponent>& components) {
    if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
    double sum = 0;
    for (const auto& c : components) {
        if (!(c.weight > 0) || !std::isfinite(c.weight)) throw std::invalid_argument("mixture weights must be positive");
        sum += c.weight;
    }
    std::vector<std::size_t> counts;
    std::size_t assigned = 0;
    double cumulative = 0;
    for (const auto& c : components) {
        cumulative += c.weight;
        const auto upto = static_cast<std::size_t>(std::llround(static_cast<double>(total) * cumulative / sum));
        counts.push_back(upto - assigned);
        assigned = upto;
    }
    return counts;
}

std::vector<DatasetShard> run_mixture(const ChainConfig& config, const std::vector<MixtureComponent>& components,
                                      std::size_t chains, std::size_t threads) {
    const auto counts = mixture_counts(config.save_count, components);
    std::vector<DatasetShard> out;
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (counts[c] == 0) continue;
        ChainConfig part = config;
        part.bias = components[c].bias;
        part.save_count = counts[c];
        part.chain_id = config.chain_id + c * chains;
        auto shards = run_chains(part, std::min(chains, counts[c]), threads);
        for (auto& s : shards) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace geoknot
