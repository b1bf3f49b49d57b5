#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "jigsaw/core.hpp"
#include "jigsaw/puzzle_gen.hpp"

namespace jigsaw {

struct RepairBackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Where an external extrapolator lives. Exactly one of `command` and
/// `endpoint` is used; `command` wins when both are set.
///
/// command:  shell prefix; the client appends
///           `extend --request <dir> --response <dir>`.
/// endpoint: http://host:port/path; the client POSTs
///           {"request": <dir>, "response": <dir>} and expects 2xx.
struct ExternalAdapter {
  std::string command;
  std::string endpoint;
  bool rotate_trick = true;
  /// Scratch root for request/response directories; empty = system temp.
  std::filesystem::path work_dir;
};

struct RepairMethod {
  enum class Kind { None, Replicate, Mirror, Linear, External };

  Kind kind = Kind::None;
  ExternalAdapter adapter;

  static RepairMethod none() { return {Kind::None, {}}; }
  static RepairMethod replicate() { return {Kind::Replicate, {}}; }
  static RepairMethod mirror() { return {Kind::Mirror, {}}; }
  static RepairMethod linear() { return {Kind::Linear, {}}; }
  static RepairMethod external(ExternalAdapter a) { return {Kind::External, std::move(a)}; }
};

/// "none", "replicate", "mirror", "linear" or "external".
std::string method_name(const RepairMethod& m);
/// Inverse of method_name. "external" takes its adapter from the
/// JIGSOLVE_ADAPTER environment variable (an http(s) URL or a command).
RepairMethod parse_method(const std::string& name);
ExternalAdapter adapter_from_string(const std::string& locator);

/// Extends `t` by `e` pixels on every side. Horizontal bands are added first,
/// then vertical bands span the widened tile, which fills the corners.
/// The central block of the result is `t` bit-exactly.
Tile repair_tile(const Tile& t, int e, const RepairMethod& method);

/// Repairs every tile by the instance's erosion_px. Method None returns the
/// instance unchanged (the no-extension baseline). External methods issue
/// one batch for the whole instance.
PuzzleInstance repair_instance(const PuzzleInstance& p, const RepairMethod& method);

/// Batch client for the file-based repair protocol.
std::vector<Image> repair_external(const std::vector<Image>& tiles, int e,
                                   const ExternalAdapter& adapter);

}  // namespace jigsaw
