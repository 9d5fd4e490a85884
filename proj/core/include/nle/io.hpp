#pragma once

// Snapshot, CSV, PGM and manifest I/O.
//
// Binary snapshot ("DLS1"), all little-endian:
//   char[4] "DLS1", int64 dim, int64 n, f64 origin[dim], f64 extent[dim],
//   f64 time, f64 values[n^dim] (row-major, x fastest).
// extent is the half-width of the box along each axis.

#include <filesystem>
#include <map>
#include <string>

#include "nle/grid_field.hpp"

namespace nle {

void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_snapshot(const std::filesystem::path& path);

/// One row per node: x[,y],value.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

/// 8-bit binary PGM: u in [-1,1] maps linearly to [255,0], nodes with
/// |u| <= band are painted 0. 1-D fields become a single row.
void write_pgm(const std::filesystem::path& path, const ScalarField& f, double band);

/// key=value lines, sorted by key. Values must not contain newlines.
using Manifest = std::map<std::string, std::string>;
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace nle
