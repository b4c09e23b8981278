#pragma once

#include <filesystem>
#include <string>

#include "malab/grid.hpp"
#include "malab/potential.hpp"

namespace malab {

/// Flat binary field container, little-endian:
///   char[8]  magic "MALABFLD"
///   u32      version (1)
///   u32      dim
///   u32[3]   extents (nx, ny, nz; nz = 1 in 2D)
///   f64      h
///   f64[3]   bbox_lo, f64[3] bbox_hi
///   u32      metadata length, then that many bytes of JSON (domain spec, labels)
///   f64[nx*ny*nz]  node values, x fastest; NaN marks undefined nodes
struct FieldFile {
  GridPtr grid;
  ScalarField values;
  std::string metadata;  // JSON text
};

void write_field(const std::filesystem::path& path, const ScalarField& field, const std::string& metadata_json = "{}");
/// Rebuilds the grid from the domain spec stored in the metadata.
FieldFile read_field(const std::filesystem::path& path);

/// CSV with header x,y[,z],value; one row per defined inside node.
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);

/// Potential u plus the domain and density needed to rebuild the state.
void write_state(const std::filesystem::path& path, const PotentialState& state);
PotentialState read_state(const std::filesystem::path& path);

}  // namespace malab
