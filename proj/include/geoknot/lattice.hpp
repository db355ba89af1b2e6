#pragma once

#include "geoknot/rng.hpp"
#include "geoknot/vec.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace geoknot {

/// Thrown when a polygon or curve violates its structural invariants.
class InvalidGeometry : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Closed self-avoiding unit-step polygon in Z^3.
///
/// Invariants: N >= 4, N even, consecutive vertices (cyclically) differ by a
/// unit step, all vertices distinct. The occupancy index is kept in sync with
/// the vertex list by every mutating operation.
class LatticePolygon {
public:
    LatticePolygon() = default;

    /// Validates and builds; throws InvalidGeometry on any invariant violation.
    static LatticePolygon from_vertices(std::vector<Vec3i> vertices);

    std::span<const Vec3i> vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }
    const Vec3i& operator[](std::size_t i) const { return verts_[i]; }
    /// Cyclic access; any integer index.
    const Vec3i& at_cyclic(std::ptrdiff_t i) const;
    bool occupied(const Vec3i& site) const { return occupancy_.contains(site); }

    /// Mirror image through the plane z = 0.
    LatticePolygon mirrored() const;

    friend bool operator==(const LatticePolygon& a, const LatticePolygon& b) { return a.verts_ == b.verts_; }

private:
    friend struct LatticeEditor;
    std::vector<Vec3i> verts_;
    std::unordered_set<Vec3i, Vec3iHash> occupancy_;
};

/// Closed polygon in R^3; the segment from the last vertex back to the first is implied.
class PolygonalCurve {
public:
    static constexpr double kCoincidenceTolerance = 1e-9;

    PolygonalCurve() = default;
    /// Validates (>= 3 vertices, no coincident vertices); throws InvalidGeometry.
    explicit PolygonalCurve(std::vector<Vec3> vertices);
    /// Skips validation; for intermediate or test-only degenerate inputs.
    static PolygonalCurve unchecked(std::vector<Vec3> vertices);
    static PolygonalCurve from_lattice(const LatticePolygon& poly);

    std::span<const Vec3> vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }
    const Vec3& operator[](std::size_t i) const { return verts_[i]; }
    const Vec3& at_cyclic(std::ptrdiff_t i) const;

    PolygonalCurve mirrored() const;
    PolygonalCurve scaled(double factor) const;

    friend bool operator==(const PolygonalCurve& a, const PolygonalCurve& b) { return a.verts_ == b.verts_; }

private:
    std::vector<Vec3> verts_;
};

enum class MoveKind { BfacfGrow, BfacfShrink, BfacfFlip, Pivot };

std::string_view to_string(MoveKind kind);

struct MoveOutcome {
    bool accepted = false;
    MoveKind kind = MoveKind::BfacfFlip;
    int delta_length = 0;
};

/// Oriented lattice edge (start -> end).
struct LatticeEdge {
    Vec3i start;
    Vec3i end;
};

/// A feasible BFACF update at edge (i, i+1) displaced along `normal`.
struct BfacfProposal {
    MoveKind kind = MoveKind::BfacfFlip;
    std::size_t edge = 0;
    Vec3i normal;
    /// Oriented edges that disappear / appear when the proposal is applied.
    std::vector<LatticeEdge> removed;
    std::vector<LatticeEdge> added;

    int delta_length() const;
};

/// Proposal probabilities for grow / shrink / flip.
struct BfacfMix {
    double grow = 0.25;
    double shrink = 0.25;
};

/// Checks a specific BFACF update; nullopt when the local geometry does not
/// match `kind` or the result would violate self-avoidance or the length bounds.
std::optional<BfacfProposal> propose_bfacf_at(const LatticePolygon& poly, MoveKind kind, std::size_t edge,
                                              Vec3i normal, std::size_t max_length);

/// Draws kind, edge and perpendicular direction, then checks feasibility.
/// Returns the drawn kind alongside the (possibly empty) proposal.
std::pair<MoveKind, std::optional<BfacfProposal>> propose_bfacf(const LatticePolygon& poly, CounterRng& rng,
                                                                std::size_t max_length, BfacfMix mix = {});

void apply_bfacf(LatticePolygon& poly, const BfacfProposal& proposal);

/// Vertex list that would result from applying the proposal.
std::vector<Vec3i> preview_bfacf(const LatticePolygon& poly, const BfacfProposal& proposal);

MoveOutcome bfacf_move(LatticePolygon& poly, CounterRng& rng, std::size_t max_length, BfacfMix mix = {});

/// Element of the cubic point group O_h: v -> (sign[k] * v[perm[k]])_k.
struct LatticeSymmetry {
    std::array<int, 3> perm{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};

    Vec3i apply(Vec3i v) const { return {sign[0] * v[perm[0]], sign[1] * v[perm[1]], sign[2] * v[perm[2]]}; }
    bool is_identity() const { return perm == std::array{0, 1, 2} && sign == std::array{1, 1, 1}; }
};

/// All 48 elements; index 0 is the identity.
std::span<const LatticeSymmetry> cubic_symmetries();

/// Indices of non-identity symmetries fixing `axis`.
std::vector<std::size_t> stabilizer(Vec3i axis);

/// Rotates the vertices strictly between `arc_start` and `arc_end` (walking
/// forward cyclically) about `arc_start` by symmetry `symmetry_index`; both
/// arc endpoints must be fixed by the symmetry. Rejected (poly untouched) on
/// self-intersection or when the symmetry does not fix the endpoints.
MoveOutcome apply_pivot(LatticePolygon& poly, std::size_t arc_start, std::size_t arc_end,
                        std::size_t symmetry_index);

/// Random pivot: two distinct edges, the longer connecting arc, a random
/// non-identity stabilizer element of the arc chord. Requires N >= 6.
MoveOutcome pivot_move(LatticePolygon& poly, CounterRng& rng);

/// True iff all vertices are pairwise distinct (hash based, expected O(N)).
bool check_self_avoiding(std::span<const Vec3i> vertices);
inline bool check_self_avoiding(const LatticePolygon& poly) { return check_self_avoiding(poly.vertices()); }

struct Checkpoint {
    LatticePolygon polygon;
    CounterRng rng;
};

inline Checkpoint capture(const LatticePolygon& poly, const CounterRng& rng) { return {poly, rng}; }
inline void restore(const Checkpoint& cp, LatticePolygon& poly, CounterRng& rng) {
    poly = cp.polygon;
    rng = cp.rng;
}

/// Jitters each vertex by an independent uniform vector in [-amplitude, amplitude]^3.
/// Requires 0 <= amplitude < 0.5; the stream is derived from `seed` alone.
PolygonalCurve to_offlattice(const LatticePolygon& poly, double amplitude, std::uint64_t seed);

}  // namespace geoknot
