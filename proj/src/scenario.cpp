#include "potkit/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "potkit/error.hpp"
#include "potkit/voxel_solver.hpp"

namespace potkit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidInput, path + ": " + what);
}

const json& object_at(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

void read_number(const json& obj, const char* key, const std::string& path, double& out) {
  if (obj.contains(key)) out = number(obj.at(key), path + "." + key);
}

ConductorGeometry parse_geometry(const json& g, double voxel_spacing, const std::filesystem::path& base) {
  object_at(g, "geometry");
  allow_keys(g, "geometry", {"ball", "nested_shells", "voxel_ball", "voxel_set"});
  if (g.size() != 1) fail("geometry", "exactly one of ball, nested_shells, voxel_ball, voxel_set");
  const auto& [kind, body] = *g.items().begin();
  const std::string path = "geometry." + kind;
  object_at(body, path);
  if (kind == "ball") {
    allow_keys(body, path, {"radius"});
    Ball b;
    read_number(body, "radius", path, b.radius);
    return b;
  }
  if (kind == "nested_shells") {
    allow_keys(body, path, {"inner_radius", "shell_faces", "outer_sphere_radius"});
    NestedShells n;
    read_number(body, "inner_radius", path, n.inner_radius);
    if (body.contains("shell_faces")) {
      const auto& faces = body.at("shell_faces");
      if (!faces.is_array()) fail(path + ".shell_faces", "expected an array of [inner, outer] pairs");
      for (std::size_t i = 0; i < faces.size(); ++i) {
        const std::string fp = path + ".shell_faces[" + std::to_string(i) + "]";
        if (!faces[i].is_array() || faces[i].size() != 2) fail(fp, "expected [inner, outer]");
        n.shell_faces.push_back({number(faces[i][0], fp + "[0]"), number(faces[i][1], fp + "[1]")});
      }
    }
    if (body.contains("outer_sphere_radius")) {
      n.outer_sphere_radius = number(body.at("outer_sphere_radius"), path + ".outer_sphere_radius");
    }
    return n;
  }
  if (kind == "voxel_ball") {
    allow_keys(body, path, {"radius"});
    double r = 1.0;
    read_number(body, "radius", path, r);
    if (!(r > 0.0)) fail(path + ".radius", "radius must be strictly positive");
    return make_ball_mask(r, voxel_spacing);
  }
  allow_keys(body, path, {"mask_file"});
  if (!body.contains("mask_file") || !body.at("mask_file").is_string()) fail(path + ".mask_file", "expected a path");
  std::filesystem::path file = body.at("mask_file").get<std::string>();
  if (file.is_relative()) file = base / file;
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot read mask file " + file.string());
  return read_mask(in);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("scenario: ") + e.what());
  }
  object_at(j, "scenario");
  allow_keys(j, "", {"geometry", "params", "grid", "requested_outputs"});
  if (!j.contains("geometry")) fail("geometry", "missing");

  Scenario s;
  if (j.contains("params")) {
    const auto& p = object_at(j.at("params"), "params");
    allow_keys(p, "params", {"k", "q", "e", "delta"});
    read_number(p, "k", "params", s.params.k);
    read_number(p, "q", "params", s.params.q);
    read_number(p, "e", "params", s.params.e);
    read_number(p, "delta", "params", s.params.delta);
  }

  const auto& g = object_at(j.at("geometry"), "geometry");
  const bool voxel = g.contains("voxel_ball") || g.contains("voxel_set");
  if (voxel) {
    VoxelGridSpec v;
    if (j.contains("grid")) {
      const auto& gr = object_at(j.at("grid"), "grid");
      allow_keys(gr, "grid", {"spacing", "padding"});
      read_number(gr, "spacing", "grid", v.spacing);
      read_number(gr, "padding", "grid", v.padding);
    }
    if (!(v.spacing > 0.0)) fail("grid.spacing", "spacing must be strictly positive");
    s.geometry = parse_geometry(g, v.spacing, base_dir);
    if (g.contains("voxel_set")) v.spacing = std::get<VoxelSet>(s.geometry).spacing;
    s.grid = v;
  } else {
    RadialGridSpec r;
    if (j.contains("grid")) {
      const auto& gr = object_at(j.at("grid"), "grid");
      allow_keys(gr, "grid", {"r_max", "node_count"});
      read_number(gr, "r_max", "grid", r.r_max);
      if (gr.contains("node_count")) r.node_count = count(gr.at("node_count"), "grid.node_count");
    }
    s.geometry = parse_geometry(g, 1.0, base_dir);
    s.grid = r;
  }

  if (j.contains("requested_outputs")) {
    const auto& r = j.at("requested_outputs");
    if (!r.is_array()) fail("requested_outputs", "expected an array of report names");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_string()) fail("requested_outputs[" + std::to_string(i) + "]", "expected a string");
      s.requested_outputs.push_back(r[i].get<std::string>());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

}  // namespace potkit
