/** \file    io.hpp
    \brief   Artifact files: CSV tables with JSON sidecars, atomic writes and a
             SHA-256 manifest.

    Numbers are printed with 17 significant digits, so identical runs give
    byte-identical files and the manifest hashes double as a determinism check.
*/
#pragma once
#include "mather/flow.hpp"
#include "mather/hj.hpp"
#include "mather/measure.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mather::io {

/// Shortest decimal form that reads back to the same double.
std::string num(double x);

/// "i1,...,id,omega1,...,omegad,U", one row per node.
std::string value_field_csv(const hj::ValueField& f);
nlohmann::json value_field_sidecar(const hj::ValueField& f);

/// "t,x1..xn,v1..vn,theta1..thetad".
std::string trajectory_csv(const flow::Trajectory& t);

/// "v1..vn,theta1..thetad,weight", entries in (omega, v) order.
std::string measure_csv(const DiscreteMeasure& mu);
nlohmann::json measure_geometry(const DiscreteMeasure& mu);

/// Writes to a temporary file in the same directory and renames it into place,
/// so a reader never sees a half-written artifact.  Creates parent directories.
void atomic_write(const std::string& path, const std::string& content);

std::string sha256_hex(const std::string& data);

struct ManifestEntry {
    std::string file;    ///< relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

/// Collects files as they are written, then writes manifest.json last.
class ArtifactWriter {
public:
    ArtifactWriter(std::string dir, std::string command);
    const std::string& dir() const { return dir_; }
    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& doc);
    const std::vector<ManifestEntry>& entries() const { return entries_; }
    /// Writes manifest.json and returns its content.
    std::string finish();

private:
    std::string dir_, command_;
    std::vector<ManifestEntry> entries_;
};

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> mismatched;  ///< hash or size differs
    std::vector<std::string> missing;
};

/// Re-hashes every file listed in dir/manifest.json.
ManifestCheck verify_manifest(const std::string& dir);

}  // namespace mather::io
