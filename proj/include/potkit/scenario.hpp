#pragma once

// Scenario files: JSON with the fields of Scenario and nothing else.
//
//   {
//     "geometry": {"ball": {"radius": 1}},
//     "params": {"k": 0.4, "q": 1, "e": 1, "delta": 0.1},
//     "grid": {"r_max": 10, "node_count": 2000},
//     "requested_outputs": ["equilibrium", "forces"]
//   }
//
// geometry is exactly one of
//   {"ball": {"radius": r}}
//   {"nested_shells": {"inner_radius": a, "shell_faces": [[a1, b1], ...],
//                      "outer_sphere_radius": R}}   (last key optional)
//   {"voxel_ball": {"radius": r}}                   (mask built at grid.spacing)
//   {"voxel_set": {"mask_file": "mask.txt"}}        (relative to the file)
// and grid is {"r_max", "node_count"} for radial geometries or
// {"spacing", "padding"} for voxel ones. Every key is optional except the
// geometry; missing ones keep the Scenario defaults. Unknown keys are errors.

#include <filesystem>
#include <string>

#include "potkit/domain.hpp"

namespace potkit {

/// Throws InvalidInput naming the offending key ("params.kk: unknown key"),
/// Io for unreadable mask files.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});

/// Throws Io when the file cannot be read, then as parse_scenario.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace potkit
