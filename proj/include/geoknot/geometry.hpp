#pragma once

#include "geoknot/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace geoknot {

/// M_ij = |x_i - x_j| over the curve's vertices.
struct DistanceMatrix {
    Eigen::MatrixXd entries;
    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

/// Raw signed solid angles between segments; segment i runs x_i -> x_{i+1}.
/// Self and adjacent entries are zero. (1/4pi) * sum of all entries is the writhe.
struct WritheMatrix {
    Eigen::MatrixXd entries;
    std::size_t degenerate_pairs = 0;
    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

struct FunctionalVector {
    double sigma_plus = 0;   // sum of pairwise distances, ordered pairs
    double omega_plus = 0;   // total writhe
    double kappa_plus = 0;   // total curvature (radians)
    double max_distance = 0; // M
    double pi_5 = 0;
    double pi_10 = 0;
    double pi_20 = 0;
    double acn = 0;
    double entanglement = 0; // E, integer valued
    double radius_of_gyration = 0;

    static constexpr std::array<std::string_view, 10> kNames{
        "sigma_plus", "omega_plus", "kappa_plus", "max_dist", "pi_5",
        "pi_10",      "pi_20",      "acn",        "entanglement", "r_g"};
    /// The seven functionals scored by the shortcut probe by default.
    static constexpr std::array<std::string_view, 7> kProbeNames{
        "sigma_plus", "omega_plus", "kappa_plus", "max_dist", "pi_5", "pi_10", "pi_20"};

    std::array<double, 10> values() const;
    /// Looks up a functional by column name.
    std::optional<double> get(std::string_view name) const;

    friend bool operator==(const FunctionalVector&, const FunctionalVector&) = default;
};

DistanceMatrix pairwise_distance_matrix(const PolygonalCurve& curve);
double sigma_plus(const DistanceMatrix& m);
double max_pairwise(const DistanceMatrix& m);

/// Pi_n: connected components (4-adjacency in index space) of strict-upper-triangle
/// entries exceeding `tolerance`.
std::size_t peak_count(const DistanceMatrix& m, double tolerance);

/// Signed solid angle subtended between segments p1->p2 and p3->p4.
/// Sets `degenerate` when a quadrilateral normal has zero length.
double segment_pair_solid_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4,
                                bool* degenerate = nullptr);

WritheMatrix writhe_matrix(const PolygonalCurve& curve);
double total_writhe(const WritheMatrix& w);
double acn(const WritheMatrix& w);

/// The four octant directions used for the lattice writhe.
inline constexpr std::array<Vec3i, 4> kOctantDirections{{{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}}};

/// Sum over the four octant projections of the crossing sign of two oriented
/// lattice edges (each projection infinitesimally tilted so every crossing is
/// generic). Returns an integer in [-4, 4]; divide by 4 for the writhe share.
int lattice_edge_pair_tait(const LatticeEdge& a, const LatticeEdge& b);

/// Tait number (signed crossing sum) of the tilted projection along kOctantDirections[direction].
int tait_number(const LatticePolygon& poly, std::size_t direction);

/// Exact writhe of a lattice polygon: mean of the four octant Tait numbers.
double lattice_writhe(const LatticePolygon& poly);

double total_curvature(const PolygonalCurve& curve);

enum class EntanglementMode { LongRange, Literal };

/// Unordered vertex pairs closer than `distance_threshold` whose cyclic index
/// separation is > (LongRange) or < (Literal) `index_threshold`.
std::size_t long_range_entanglement(const PolygonalCurve& curve, double distance_threshold = 5.0,
                                    std::size_t index_threshold = 10,
                                    EntanglementMode mode = EntanglementMode::LongRange);

double radius_of_gyration(const PolygonalCurve& curve);

/// All functionals in one pass. When `lattice` is supplied the writhe comes
/// from the exact lattice formula instead of the Banchoff sum.
FunctionalVector functional_vector(const PolygonalCurve& curve, const LatticePolygon* lattice = nullptr);

}  // namespace geoknot
