#pragma once

#include "geoknot/geometry.hpp"
#include "geoknot/lattice.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geoknot {

enum class KnotClass { Unknot, Trefoil, Other };

/// "0_1", "3_1", "other".
std::string_view to_string(KnotClass k);
/// Accepts "0_1"/"3_1" (and the typographic "0₁"/"3₁"); throws std::invalid_argument otherwise.
KnotClass parse_knot_class(std::string_view label);

class ProjectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One passage through a crossing while walking the knot.
struct GaussEvent {
    std::size_t crossing = 0;
    bool over = false;
};

/// Alexander-matrix view of one crossing.
struct Crossing {
    std::size_t over_arc = 0;
    std::size_t under_in = 0;
    std::size_t under_out = 0;
    int sign = 1;
};

/// Signed Gauss code of a knot projection. Arcs run between consecutive
/// under-passages, so a diagram with n >= 1 crossings has n arcs.
class KnotDiagram {
public:
    KnotDiagram() = default;
    /// `events` lists every crossing exactly twice (once over, once under).
    KnotDiagram(std::vector<GaussEvent> events, std::vector<int> signs);

    /// Parses "O1+ U2- O3+ ..." (crossing ids are arbitrary positive labels).
    static KnotDiagram from_gauss_code(std::string_view code);
    std::string gauss_code() const;

    std::size_t crossing_count() const { return signs_.size(); }
    std::size_t arc_count() const { return signs_.size(); }
    const std::vector<GaussEvent>& events() const { return events_; }
    const std::vector<int>& signs() const { return signs_; }
    std::vector<Crossing> crossings() const;
    int writhe() const;

    /// Same diagram with the walk starting at event `offset`.
    KnotDiagram rebased(std::size_t offset) const;

private:
    std::vector<GaussEvent> events_;
    std::vector<int> signs_;
};

/// Deterministic unit vectors used as projection directions.
std::vector<Vec3> projection_schedule(std::size_t count, std::uint64_t salt = 0);

/// Projects along `direction` (viewer on the +direction side). Non-generic
/// directions are retried with up to 32 deterministic tilts before throwing
/// ProjectionError.
KnotDiagram project_to_diagram(const PolygonalCurve& curve, const Vec3& direction);

/// |det| of the Alexander matrix with one row and column removed.
double alexander_determinant(const KnotDiagram& diagram, double t);

/// Exact knot determinant |Delta(-1)|.
std::int64_t knot_determinant(const KnotDiagram& diagram);

/// Second Vassiliev invariant from the Gauss diagram (trefoil 1, figure-eight -1).
int vassiliev_v2_exact(const KnotDiagram& diagram);

/// Alternating-pair contraction sum_{i<j<k<l} w_ik w_jl / (4 pi)^2, in O(N^2).
double vassiliev_v2_writhe(const WritheMatrix& w);

/// Removes vertices whose triangle (prev, v, next) is pierced by no other
/// segment; repeats until stable. Preserves the knot type.
PolygonalCurve simplify_curve(const PolygonalCurve& curve);

struct VerificationResult {
    std::int64_t determinant = 0;
    int v2_exact = 0;
    double v2_writhe = 0;
    KnotClass verdict = KnotClass::Other;
    std::vector<std::string> checks_passed;
};

/// Invariant pair expected for a class: (determinant, |v2|).
std::pair<std::int64_t, int> expected_invariants(KnotClass k);

/// Projects the simplified curve along the first generic schedule direction
/// (offset by `schedule_salt`), computes det and v2 and compares them with
/// `expected`. The verdict is `expected` only when every check passes.
VerificationResult verify_knot_class(const PolygonalCurve& curve, KnotClass expected, std::uint64_t schedule_salt = 0);
VerificationResult verify_knot_class(const LatticePolygon& poly, KnotClass expected, std::uint64_t schedule_salt = 0);

/// Classification without an expectation: 0_1, 3_1 or Other.
KnotClass classify(const PolygonalCurve& curve, std::uint64_t schedule_salt = 0);

}  // namespace geoknot
