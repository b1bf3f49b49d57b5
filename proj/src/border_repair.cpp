#include "jigsaw/border_repair.hpp"

#include <httplib.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "jigsaw/image_io.hpp"

namespace jigsaw {
namespace {

using Kind = RepairMethod::Kind;

Image transpose(const Image& src) {
  Image out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(y, x, c);
  return out;
}

// Value k >= 1 pixels beyond the edge of a line whose samples, walking inward
// from the edge, are edge[0], edge[1], ... (length n).
template <typename At>
std::uint8_t extrapolate(At edge, int n, int k, Kind kind) {
  switch (kind) {
    case Kind::Mirror:
      return edge(std::min(k - 1, n - 1));
    case Kind::Linear: {
      if (n < 2) return edge(0);
      const int last = edge(0);
      const int step = last - edge(1);
      return static_cast<std::uint8_t>(std::clamp(last + k * step, 0, 255));
    }
    default:
      return edge(0);
  }
}

// Adds e columns on the left and right of every row.
Image extend_rows(const Image& src, int e, Kind kind) {
  const int w = src.width();
  Image out(src.height(), w + 2 * e);
  out.paste(src, 0, e);
  for (int y = 0; y < src.height(); ++y) {
    for (int c = 0; c < 3; ++c) {
      auto right = [&](int i) { return src.at(y, w - 1 - i, c); };
      auto left = [&](int i) { return src.at(y, i, c); };
      for (int k = 1; k <= e; ++k) {
        out.at(y, e + w - 1 + k, c) = extrapolate(right, w, k, kind);
        out.at(y, e - k, c) = extrapolate(left, w, k, kind);
      }
    }
  }
  return out;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'')
      out += "'\\''";
    else
      out += ch;
  }
  return out + "'";
}

std::filesystem::path make_scratch_dir(const std::filesystem::path& root) {
  static std::atomic<unsigned> counter{0};
  const auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
  for (;;) {
    auto dir = base / ("jigsaw-repair-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
    if (std::filesystem::create_directories(dir)) return dir;
  }
}

void invoke_adapter(const ExternalAdapter& adapter, const std::filesystem::path& request,
                    const std::filesystem::path& response) {
  if (!adapter.command.empty()) {
    const std::string cmd = adapter.command + " extend --request " + shell_quote(request) +
                            " --response " + shell_quote(response);
    const int status = std::system(cmd.c_str());
    if (status != 0)
      throw RepairBackendError("adapter command exited with status " + std::to_string(status));
    return;
  }
  if (adapter.endpoint.empty()) throw RepairBackendError("external adapter has no locator");

  // Split http://host:port/path into scheme-host-port and path.
  const auto scheme_end = adapter.endpoint.find("://");
  const auto path_start =
      adapter.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = adapter.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : adapter.endpoint.substr(path_start);

  httplib::Client client(origin);
  client.set_read_timeout(600, 0);
  const nlohmann::json body{{"request", request.string()}, {"response", response.string()}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res)
    throw RepairBackendError("adapter endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw RepairBackendError("adapter endpoint returned HTTP " + std::to_string(res->status));
}

}  // namespace

std::string method_name(const RepairMethod& m) {
  switch (m.kind) {
    case Kind::None: return "none";
    case Kind::Replicate: return "replicate";
    case Kind::Mirror: return "mirror";
    case Kind::Linear: return "linear";
    case Kind::External: return "external";
  }
  return "?";
}

ExternalAdapter adapter_from_string(const std::string& locator) {
  ExternalAdapter a;
  if (locator.rfind("http://", 0) == 0 || locator.rfind("https://", 0) == 0)
    a.endpoint = locator;
  else
    a.command = locator;
  return a;
}

RepairMethod parse_method(const std::string& name) {
  if (name == "none") return RepairMethod::none();
  if (name == "replicate") return RepairMethod::replicate();
  if (name == "mirror") return RepairMethod::mirror();
  if (name == "linear") return RepairMethod::linear();
  if (name == "external") {
    const char* env = std::getenv("JIGSOLVE_ADAPTER");
    return RepairMethod::external(adapter_from_string(env ? env : ""));
  }
  throw DomainError("unknown repair method '" + name + "'");
}

Tile repair_tile(const Tile& t, int e, const RepairMethod& method) {
  if (e < 0) throw DomainError("extension must be nonnegative");
  if (e == 0 || method.kind == Kind::None) return t;
  Image out;
  if (method.kind == Kind::External) {
    out = std::move(repair_external({t.pixels}, e, method.adapter).front());
  } else {
    const Image wide = extend_rows(t.pixels, e, method.kind);
    out = transpose(extend_rows(transpose(wide), e, method.kind));
  }
  return Tile{std::move(out), t.original_index, 0.0, 0};
}

PuzzleInstance repair_instance(const PuzzleInstance& p, const RepairMethod& method) {
  const int e = p.erosion_px;
  for (const Tile& t : p.tiles)
    if (t.erosion_px != e) throw DomainError("tiles disagree on erosion amount");
  if (e == 0 || method.kind == Kind::None) return p;

  PuzzleInstance out = p;
  if (method.kind == Kind::External) {
    std::vector<Image> batch;
    batch.reserve(p.tiles.size());
    for (const Tile& t : p.tiles) batch.push_back(t.pixels);
    auto repaired = repair_external(batch, e, method.adapter);
    for (std::size_t k = 0; k < out.tiles.size(); ++k)
      out.tiles[k] = Tile{std::move(repaired[k]), p.tiles[k].original_index, 0.0, 0};
  } else {
    for (auto& t : out.tiles) t = repair_tile(t, e, method);
  }
  out.beta = 0.0;
  out.erosion_px = 0;
  return out;
}

std::vector<Image> repair_external(const std::vector<Image>& tiles, int e,
                                   const ExternalAdapter& adapter) {
  namespace fs = std::filesystem;
  const fs::path scratch = make_scratch_dir(adapter.work_dir);
  const fs::path request = scratch / "request";
  const fs::path response = scratch / "response";
  fs::create_directories(request);
  fs::create_directories(response);

  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{scratch};

  nlohmann::json req;
  req["extension_pixels"] = e;
  req["rotate_trick"] = adapter.rotate_trick;
  req["tiles"] = nlohmann::json::array();
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    const std::string file = std::to_string(k) + ".png";
    write_png(request / file, tiles[k]);
    req["tiles"].push_back({{"id", static_cast<int>(k)}, {"file", file}});
  }
  std::ofstream(request / "request.json") << req.dump(2) << '\n';

  invoke_adapter(adapter, request, response);

  std::ifstream in(response / "response.json");
  if (!in) throw RepairBackendError("protocol violation: response.json missing");
  nlohmann::json res;
  try {
    res = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw RepairBackendError(std::string("protocol violation: ") + ex.what());
  }

  std::map<int, fs::path> files;
  try {
    for (const auto& entry : res.at("tiles")) {
      const auto status = entry.value("status", std::string{"ok"});
      const int id = entry.at("id").get<int>();
      if (status != "ok")
        throw RepairBackendError("adapter reported status '" + status + "' for tile " +
                                 std::to_string(id));
      files[id] = response / entry.at("file").get<std::string>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw RepairBackendError(std::string("protocol violation: ") + ex.what());
  }

  std::vector<Image> out;
  out.reserve(tiles.size());
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    auto it = files.find(static_cast<int>(k));
    if (it == files.end())
      throw RepairBackendError("protocol violation: no response for tile " + std::to_string(k));
    Image img;
    try {
      img = read_image(it->second);
    } catch (const ImageIoError& ex) {
      throw RepairBackendError(std::string("protocol violation: ") + ex.what());
    }
    const int want = tiles[k].width() + 2 * e;
    if (img.width() != want || img.height() != tiles[k].height() + 2 * e)
      throw RepairBackendError("protocol violation: tile " + std::to_string(k) + " is " +
                               std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                               ", expected " + std::to_string(want) + "x" + std::to_string(want));
    img.paste(tiles[k], e, e);
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace jigsaw
