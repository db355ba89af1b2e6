#pragma once

#include "geoknot/geometry.hpp"
#include "geoknot/lattice.hpp"
#include "geoknot/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoknot {

inline constexpr std::string_view kFormatVersion = "geoknot-xyz/1";

/// File could not be opened, read, or written, or its contents are malformed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 12 significant digits, shortest form.
std::string format_real(double v);
/// The value as it reads back after format_real.
double quantize(double v);
PolygonalCurve quantize(const PolygonalCurve& curve);

void write_xyz(std::ostream& os, const PolygonalCurve& curve);
void write_xyz(const std::filesystem::path& path, const PolygonalCurve& curve);
PolygonalCurve read_xyz(std::istream& is);
PolygonalCurve read_xyz(const std::filesystem::path& path);

/// Integer "x y z" lines after a count line; validated as a lattice polygon.
LatticePolygon read_lattice_polygon(std::istream& is);
LatticePolygon read_lattice_polygon(const std::filesystem::path& path);
void write_lattice_polygon(std::ostream& os, const LatticePolygon& poly);

/// Seed directory: $GEOKNOT_SEED_DIR, else the compiled-in data/seeds path.
std::filesystem::path default_seed_dir();

/// Loads "<dir>/<label>.txt" and re-verifies its knot class.
/// Throws std::invalid_argument for unsupported labels and IoError for
/// missing, corrupt or misclassified seed files.
LatticePolygon load_seed_polygon(KnotClass knot, const std::filesystem::path& dir = default_seed_dir());
LatticePolygon load_seed_polygon(std::string_view label, const std::filesystem::path& dir = default_seed_dir());

void write_writhe_matrix(std::ostream& os, const WritheMatrix& w);
void write_writhe_matrix(const std::filesystem::path& path, const WritheMatrix& w);
/// Rejects non-square input and asymmetry beyond 1e-6.
WritheMatrix read_writhe_matrix(std::istream& is);
WritheMatrix read_writhe_matrix(const std::filesystem::path& path);

struct ManifestRow {
    std::string id;
    std::string label;
    std::string path;
    std::uint64_t seed = 0;
    std::uint64_t chain_id = 0;
    FunctionalVector functionals;
};

inline constexpr std::string_view kManifestHeader =
    "id,label,path,seed,chain_id,sigma_plus,omega_plus,kappa_plus,max_dist,pi_5,pi_10,pi_20,acn,entanglement,r_g";

void write_manifest(std::ostream& os, const std::vector<ManifestRow>& rows);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
/// Checks the header, id uniqueness and finiteness of the functional columns.
std::vector<ManifestRow> read_manifest(std::istream& is);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Resolves a manifest path entry relative to the manifest's directory.
std::filesystem::path resolve_manifest_path(const std::filesystem::path& manifest, const std::string& entry);

}  // namespace geoknot
